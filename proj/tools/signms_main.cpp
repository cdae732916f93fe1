#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "signms/config.hpp"
#include "signms/errors.hpp"
#include "signms/experiment.hpp"
#include "signms/verify.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::map<std::string, std::string>& flags, bool print_config) {
  const std::optional<std::string> path = config_path.empty() ? std::nullopt : std::optional(config_path);
  const signms::ExperimentConfig config = signms::parse_config(path, flags);
  if (print_config) {
    std::cout << signms::echo_config(config);
    return 0;
  }
  const signms::ExperimentResult result = signms::run_experiment(config, &std::cerr);
  signms::write_outputs(result);
  std::cout << signms::results_csv(result);
  if (!result.q1.empty()) std::cout << "\nQ1 on the coarse grid\n" << signms::q1_csv(result);
  std::cerr << "wrote " << config.output_dir << "/results.csv\n";
  return result.all_ok() ? 0 : 1;
}

int cmd_verify() {
  int failed = 0;
  for (const auto& r : signms::run_self_checks()) {
    std::printf("%s  %s: %s\n", r.ok ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    failed += r.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint energy minimizing multiscale solver for sign-changing Helmholtz problems"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment and write results.csv");
  std::string config_path, experiment, out_dir;
  bool parallel = false, dump = false, print_config = false;
  std::vector<std::string> sets;
  run->add_option("--config,-c", config_path, "key = value config file")->check(CLI::ExistingFile);
  run->add_option("--experiment,-e", experiment, "flat_interface | random_inclusions | nim_slab | custom");
  run->add_option("--out,-o", out_dir, "output directory");
  run->add_flag("--parallel", parallel, "solve the (H, m) rows concurrently");
  run->add_flag("--dump-fields", dump, "write u_ref, u_ms and |error| grids");
  run->add_flag("--print-config", print_config, "print the resolved config and exit");
  run->add_option("--set,-s", sets, "override a config key, key=value (repeatable)")->allow_extra_args(false);

  app.add_subcommand("verify", "quick self-checks on small meshes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::map<std::string, std::string> flags;
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw signms::ConfigError("--set expects key=value, got '" + s + "'");
        auto trim = [](std::string t) {
          const auto b = t.find_first_not_of(" \t");
          const auto e = t.find_last_not_of(" \t");
          return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
        };
        flags[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
      }
      if (!experiment.empty()) flags["experiment"] = experiment;
      if (!out_dir.empty()) flags["output_dir"] = out_dir;
      if (parallel) flags["parallel"] = "true";
      if (dump) flags["dump_fields"] = "true";
      return cmd_run(config_path, flags, print_config);
    }
    return cmd_verify();
  } catch (const signms::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
