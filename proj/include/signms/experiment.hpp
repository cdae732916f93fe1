#pragma once

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "signms/assembly.hpp"
#include "signms/coarse.hpp"
#include "signms/config.hpp"

namespace signms {

struct StageTimings {
  double aux = 0.0;
  double basis = 0.0;
  double coarse = 0.0;
  double total = 0.0;
};

/// One (H, m) run of the multiscale method.
struct SolveReport {
  std::string experiment;
  int n_fine = 0;
  int n_coarse = 0;
  double H = 0.0;
  int layers = 0;
  int l_star = 0;
  double k = 0.0;
  double mu_msh = 0.0;

  bool ok = false;
  std::string error;

  RelativeErrors errors;                      ///< against the fine Q1 reference
  std::optional<RelativeErrors> errors_exact; ///< against the exact nodal interpolant, when known
  double lambda_gap = 0.0;
  double upsilon = 0.0;
  double rho = 0.0;
  bool rho_exceeds_threshold = false;
  double f_sinv = 0.0;
  StageTimings seconds;
};

/// Q1 finite elements directly on the coarse grid, compared with the exact
/// solution on the fine grid (flat interface only).
struct Q1Baseline {
  int n_coarse = 0;
  double H = 0.0;
  RelativeErrors errors;
};

/// Fine-scale data shared by every (H, m) row of one experiment.
struct FineSetup {
  CoefficientField field;
  SourceField source;
  FineProblem problem;
  ReferenceSolution reference;
  std::optional<std::vector<double>> exact;  ///< nodal exact solution, flat interface only
  double upsilon = 0.0;
  double seconds = 0.0;
};

FineSetup make_fine_setup(const ExperimentConfig& config);

/// Reference solutions keyed by the settings that define the fine problem.
class ReferenceCache {
public:
  std::shared_ptr<const FineSetup> get(const ExperimentConfig& config);
  int hits() const { return hits_; }
  int misses() const { return misses_; }

  static std::string key(const ExperimentConfig& config);

private:
  std::map<std::string, std::shared_ptr<const FineSetup>> entries_;
  int hits_ = 0;
  int misses_ = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SolveReport> rows;
  std::vector<Q1Baseline> q1;
  double reference_seconds = 0.0;

  bool all_ok() const;
};

/// Runs every (n_coarse, m) pair of the config. A failing row is recorded
/// with its error and the remaining rows still run.
ExperimentResult run_experiment(const ExperimentConfig& config, ReferenceCache& cache, std::ostream* log = nullptr);
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Runs one (n_coarse, m) row against an existing fine setup.
SolveReport run_row(const ExperimentConfig& config, const FineSetup& fine, int n_coarse, int layers,
                    int threads = 1, Eigen::VectorXd* u_ms = nullptr);

/// Deterministic error table (4 significant digits, no timings).
std::string results_csv(const ExperimentResult& result);
std::string timings_csv(const ExperimentResult& result);
std::string q1_csv(const ExperimentResult& result);

/// Writes results.csv, timings.csv, config.resolved and, when available,
/// q1_baseline.csv into config.output_dir.
void write_outputs(const ExperimentResult& result);

}  // namespace signms
