#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "signms/coeffs.hpp"
#include "signms/msbasis.hpp"

namespace signms {

enum class ExperimentKind { flat_interface, random_inclusions, nim_slab, custom };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

/// Fully resolved run configuration. `provenance` records, per key, whether
/// the value came from the default, the config file or a command-line flag.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::flat_interface;
  int n_fine = 400;
  std::vector<int> n_coarse{20, 40, 80};
  std::vector<int> layers{1, 2, 3, 4};
  int l_star = 3;
  double k = 4.0;
  double mu_msh = 24.0;
  CorrectionWeight correction_weight = CorrectionWeight::signed_mu;
  std::uint64_t seed = 1;
  std::string output_dir = "signms-out";
  bool dump_fields = false;
  bool parallel = false;
  double rho_threshold = 1.0;

  FlatInterfaceParams flat;
  InclusionParams inclusions;

  std::array<double, 2> source_center{0.5, 0.5};
  double source_spread = 0.05;
  bool source_normalized = true;

  std::string sigma_path;
  std::string c_path;
  std::string f_path;

  std::map<std::string, std::string> provenance;
};

/// Flat `key = value` lines; `#` starts a comment; lists are `[a, b, c]`.
/// Throws IngestError on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& origin);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies defaults (experiment-specific ones included), then file values,
/// then flag values. Unknown keys raise ConfigError listing all of them;
/// type mismatches name the key and the expected type. Validates mesh
/// divisibility for every n_coarse entry and k > 0.
ExperimentConfig resolve_config(const std::map<std::string, std::string>& file_values,
                                const std::map<std::string, std::string>& flag_values);

ExperimentConfig parse_config(const std::optional<std::string>& path,
                              const std::map<std::string, std::string>& flag_values);

/// `key = value  # provenance` lines, one per key, in a fixed order.
std::string echo_config(const ExperimentConfig& config);

}  // namespace signms
