#include <fstream>
#include <numbers>

#include "doctest.h"
#include "signms/config.hpp"
#include "signms/errors.hpp"
#include "test_util.hpp"

using namespace signms;

namespace {

std::string config_file(const std::string& name, const std::string& text) {
  const auto path = testutil::tmp_dir("config") / name;
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST_CASE("defaults") {
  const ExperimentConfig c = parse_config(config_file("empty.cfg", ""), {});
  CHECK(c.experiment == ExperimentKind::flat_interface);
  CHECK(c.n_fine == 400);
  CHECK(c.n_coarse == std::vector<int>{20, 40, 80});
  CHECK(c.layers == std::vector<int>{1, 2, 3, 4});
  CHECK(c.l_star == 3);
  CHECK(c.k == 4.0);
  CHECK(c.mu_msh == 24.0);
  CHECK(c.correction_weight == CorrectionWeight::signed_mu);
  CHECK(c.provenance.at("k") == "default");

  const ExperimentConfig nim = parse_config(std::nullopt, {{"experiment", "nim_slab"}});
  CHECK(nim.k == doctest::Approx(2 * std::numbers::pi * std::numbers::pi));
  CHECK(nim.source_center == std::array<double, 2>{0.0, 0.5});
  CHECK_FALSE(nim.source_normalized);
}

TEST_CASE("precedence and echo") {
  const auto path = config_file("k.cfg", "# wavenumber\nk = 6\nn_coarse = [10, 20]\n");
  const ExperimentConfig file_only = parse_config(path, {});
  CHECK(file_only.k == 6.0);
  CHECK(file_only.provenance.at("k") == "file");
  CHECK(file_only.n_coarse == std::vector<int>{10, 20});

  const ExperimentConfig both = parse_config(path, {{"k", "8"}});
  CHECK(both.k == 8.0);
  CHECK(both.provenance.at("k") == "flag");
  const std::string echo = echo_config(both);
  CHECK(echo.find("k = 8  # flag") != std::string::npos);
  CHECK(echo.find("n_coarse = [10, 20]  # file") != std::string::npos);

  // the echo parses back to the same config
  const ExperimentConfig again = parse_config(config_file("echo.cfg", echo), {});
  CHECK(echo_config(again).size() > 0);
  CHECK(again.k == 8.0);
  CHECK(again.n_coarse == both.n_coarse);
}

TEST_CASE("bad configs") {
  try {
    parse_config(config_file("unknown.cfg", "kk = 1\nfoo = 2\n"), {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("kk") != std::string::npos);
    CHECK(msg.find("foo") != std::string::npos);
  }
  try {
    parse_config(std::nullopt, {{"l_star", "three"}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("l_star") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"n_coarse", "[3]"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"k", "-1"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"experiment", "custom"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"experiment", "banana"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(config_file("dup.cfg", "k = 1\nk = 2\n"), {}), IngestError);
  CHECK_THROWS_AS(parse_config(config_file("noeq.cfg", "k 1\n"), {}), IngestError);
}
