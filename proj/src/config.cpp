#include "signms/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "signms/errors.hpp"
#include "signms/mesh.hpp"

namespace signms {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void type_error(const std::string& key, const std::string& expected, const std::string& value) {
  throw ConfigError("config key `" + key + "`: expected " + expected + ", got `" + value + "`");
}

int as_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) type_error(key, "integer", v);
  return out;
}

std::uint64_t as_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) type_error(key, "non-negative integer", v);
  return out;
}

double as_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) type_error(key, "number", v);
  return out;
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  type_error(key, "boolean (true/false)", v);
}

std::vector<std::string> as_list(const std::string& key, const std::string& v, const std::string& expected) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') type_error(key, expected, v);
  std::vector<std::string> items;
  std::stringstream ss(v.substr(1, v.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) type_error(key, expected, v);
    items.push_back(item);
  }
  if (items.empty()) type_error(key, expected, v);
  return items;
}

std::vector<int> as_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : as_list(key, v, "list of integers like [20, 40]")) out.push_back(as_int(key, item));
  return out;
}

std::string fmt_double(double v) {
  // shortest text that round-trips
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_int_list(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

struct KeySpec {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"experiment", [](auto& c, const auto& v) { c.experiment = parse_experiment_kind(v); },
       [](const auto& c) { return to_string(c.experiment); }},
      {"n_fine", [](auto& c, const auto& v) { c.n_fine = as_int("n_fine", v); },
       [](const auto& c) { return std::to_string(c.n_fine); }},
      {"n_coarse", [](auto& c, const auto& v) { c.n_coarse = as_int_list("n_coarse", v); },
       [](const auto& c) { return fmt_int_list(c.n_coarse); }},
      {"m", [](auto& c, const auto& v) { c.layers = as_int_list("m", v); },
       [](const auto& c) { return fmt_int_list(c.layers); }},
      {"l_star", [](auto& c, const auto& v) { c.l_star = as_int("l_star", v); },
       [](const auto& c) { return std::to_string(c.l_star); }},
      {"k", [](auto& c, const auto& v) { c.k = as_double("k", v); }, [](const auto& c) { return fmt_double(c.k); }},
      {"mu_msh", [](auto& c, const auto& v) { c.mu_msh = as_double("mu_msh", v); },
       [](const auto& c) { return fmt_double(c.mu_msh); }},
      {"correction_weight",
       [](auto& c, const auto& v) {
         if (v == "signed") c.correction_weight = CorrectionWeight::signed_mu;
         else if (v == "absolute") c.correction_weight = CorrectionWeight::absolute_mu;
         else type_error("correction_weight", "`signed` or `absolute`", v);
       },
       [](const auto& c) {
         return std::string(c.correction_weight == CorrectionWeight::signed_mu ? "signed" : "absolute");
       }},
      {"seed", [](auto& c, const auto& v) { c.seed = as_u64("seed", v); },
       [](const auto& c) { return std::to_string(c.seed); }},
      {"output_dir", [](auto& c, const auto& v) { c.output_dir = v; }, [](const auto& c) { return c.output_dir; }},
      {"dump_fields", [](auto& c, const auto& v) { c.dump_fields = as_bool("dump_fields", v); },
       [](const auto& c) { return std::string(c.dump_fields ? "true" : "false"); }},
      {"parallel", [](auto& c, const auto& v) { c.parallel = as_bool("parallel", v); },
       [](const auto& c) { return std::string(c.parallel ? "true" : "false"); }},
      {"rho_threshold", [](auto& c, const auto& v) { c.rho_threshold = as_double("rho_threshold", v); },
       [](const auto& c) { return fmt_double(c.rho_threshold); }},
      {"sigma_plus",
       [](auto& c, const auto& v) { c.flat.sigma_plus = c.inclusions.sigma_plus = as_double("sigma_plus", v); },
       [](const auto& c) {
         return fmt_double(c.experiment == ExperimentKind::random_inclusions ? c.inclusions.sigma_plus
                                                                             : c.flat.sigma_plus);
       }},
      {"sigma_minus",
       [](auto& c, const auto& v) {
         c.flat.sigma_minus_mag = c.inclusions.sigma_minus_mag = as_double("sigma_minus", v);
       },
       [](const auto& c) {
         return fmt_double(c.experiment == ExperimentKind::random_inclusions ? c.inclusions.sigma_minus_mag
                                                                             : c.flat.sigma_minus_mag);
       }},
      {"gamma", [](auto& c, const auto& v) { c.flat.gamma = as_double("gamma", v); },
       [](const auto& c) { return fmt_double(c.flat.gamma); }},
      {"inclusion_count", [](auto& c, const auto& v) { c.inclusions.count = as_int("inclusion_count", v); },
       [](const auto& c) { return std::to_string(c.inclusions.count); }},
      {"inclusion_min_size", [](auto& c, const auto& v) { c.inclusions.min_size = as_int("inclusion_min_size", v); },
       [](const auto& c) { return std::to_string(c.inclusions.min_size); }},
      {"inclusion_max_size", [](auto& c, const auto& v) { c.inclusions.max_size = as_int("inclusion_max_size", v); },
       [](const auto& c) { return std::to_string(c.inclusions.max_size); }},
      {"source_center",
       [](auto& c, const auto& v) {
         const auto items = as_list("source_center", v, "pair like [0.5, 0.5]");
         if (items.size() != 2) type_error("source_center", "pair like [0.5, 0.5]", v);
         c.source_center = {as_double("source_center", items[0]), as_double("source_center", items[1])};
       },
       [](const auto& c) {
         return "[" + fmt_double(c.source_center[0]) + ", " + fmt_double(c.source_center[1]) + "]";
       }},
      {"source_spread", [](auto& c, const auto& v) { c.source_spread = as_double("source_spread", v); },
       [](const auto& c) { return fmt_double(c.source_spread); }},
      {"source_normalized", [](auto& c, const auto& v) { c.source_normalized = as_bool("source_normalized", v); },
       [](const auto& c) { return std::string(c.source_normalized ? "true" : "false"); }},
      {"sigma_path", [](auto& c, const auto& v) { c.sigma_path = v; }, [](const auto& c) { return c.sigma_path; }},
      {"c_path", [](auto& c, const auto& v) { c.c_path = v; }, [](const auto& c) { return c.c_path; }},
      {"f_path", [](auto& c, const auto& v) { c.f_path = v; }, [](const auto& c) { return c.f_path; }},
  };
  return specs;
}

void apply_experiment_defaults(ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentKind::flat_interface:
      c.k = 4.0;
      break;
    case ExperimentKind::random_inclusions:
      c.k = 4.0;
      c.source_center = {0.5, 0.5};
      c.source_spread = 0.05;
      c.source_normalized = true;
      break;
    case ExperimentKind::nim_slab:
      c.k = 2.0 * std::numbers::pi * std::numbers::pi;
      c.source_center = {0.0, 0.5};
      c.source_spread = 0.05;
      c.source_normalized = false;
      break;
    case ExperimentKind::custom:
      c.k = 4.0;
      break;
  }
}

void validate_config(const ExperimentConfig& c) {
  if (!(c.k > 0.0)) throw ConfigError("k must be positive, got " + fmt_double(c.k));
  if (!(c.mu_msh > 0.0)) throw ConfigError("mu_msh must be positive");
  if (c.l_star < 1) throw ConfigError("l_star must be >= 1");
  if (c.n_coarse.empty() || c.layers.empty()) throw ConfigError("n_coarse and m lists must be non-empty");
  for (int nc : c.n_coarse) {
    // Throws a ConfigError naming both values.
    (void)TwoScaleMesh(c.n_fine, nc);
  }
  for (int m : c.layers) {
    if (m < 0) throw ConfigError("oversampling layers must be >= 0, got " + std::to_string(m));
  }
  if (c.experiment == ExperimentKind::custom && c.sigma_path.empty()) {
    throw ConfigError("experiment `custom` requires sigma_path");
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::flat_interface: return "flat_interface";
    case ExperimentKind::random_inclusions: return "random_inclusions";
    case ExperimentKind::nim_slab: return "nim_slab";
    case ExperimentKind::custom: return "custom";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "flat_interface") return ExperimentKind::flat_interface;
  if (name == "random_inclusions") return ExperimentKind::random_inclusions;
  if (name == "nim_slab") return ExperimentKind::nim_slab;
  if (name == "custom") return ExperimentKind::custom;
  throw ConfigError("config key `experiment`: expected one of flat_interface, random_inclusions, nim_slab, custom; got `" +
                    name + "`");
}

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IngestError(origin, line_no, "expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw IngestError(origin, line_no, "empty key");
    if (!out.emplace(key, value).second) throw IngestError(origin, line_no, "duplicate key `" + key + "`");
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(path, 0, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path);
}

ExperimentConfig resolve_config(const std::map<std::string, std::string>& file_values,
                                const std::map<std::string, std::string>& flag_values) {
  const auto& specs = key_specs();
  std::string unknown;
  for (const auto* values : {&file_values, &flag_values}) {
    for (const auto& [key, _] : *values) {
      bool known = false;
      for (const auto& s : specs) known = known || s.name == key;
      if (!known) unknown += (unknown.empty() ? "" : ", ") + key;
    }
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);

  ExperimentConfig cfg;
  for (const auto& s : specs) cfg.provenance[s.name] = "default";

  // The experiment choice selects the defaults the other keys start from.
  if (auto it = flag_values.find("experiment"); it != flag_values.end()) {
    cfg.experiment = parse_experiment_kind(it->second);
  } else if (auto jt = file_values.find("experiment"); jt != file_values.end()) {
    cfg.experiment = parse_experiment_kind(jt->second);
  }
  apply_experiment_defaults(cfg);

  for (const auto& s : specs) {
    if (auto it = flag_values.find(s.name); it != flag_values.end()) {
      s.set(cfg, it->second);
      cfg.provenance[s.name] = "flag";
    } else if (auto jt = file_values.find(s.name); jt != file_values.end()) {
      s.set(cfg, jt->second);
      cfg.provenance[s.name] = "file";
    }
  }
  cfg.inclusions.seed = cfg.seed;
  validate_config(cfg);
  return cfg;
}

ExperimentConfig parse_config(const std::optional<std::string>& path,
                              const std::map<std::string, std::string>& flag_values) {
  const auto file_values = path ? read_config_file(*path) : std::map<std::string, std::string>{};
  return resolve_config(file_values, flag_values);
}

std::string echo_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& s : key_specs()) {
    const auto it = config.provenance.find(s.name);
    out += s.name + " = " + s.get(config) + "  # " + (it == config.provenance.end() ? "default" : it->second) + "\n";
  }
  return out;
}

}  // namespace signms
