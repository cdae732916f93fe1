#include "signms/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>

#include "signms/auxspace.hpp"
#include "signms/errors.hpp"
#include "signms/grid_io.hpp"
#include "signms/msbasis.hpp"
#include "signms/parallel.hpp"

namespace signms {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string csv_text(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ' ';
  }
  return s;
}

// Bilinear prolongation of a nodal vector from an n_c x n_c grid to the
// fine grid; exact for Q1 functions on nested grids.
Eigen::VectorXd prolongate(const TwoScaleMesh& fine, int n_c, const Eigen::VectorXd& coarse) {
  const int ratio = fine.n_fine() / n_c;
  const int side_c = n_c + 1;
  Eigen::VectorXd out(fine.num_nodes());
  for (int iy = 0; iy <= fine.n_fine(); ++iy) {
    for (int ix = 0; ix <= fine.n_fine(); ++ix) {
      const int cx = std::min(ix / ratio, n_c - 1);
      const int cy = std::min(iy / ratio, n_c - 1);
      const double tx = static_cast<double>(ix - cx * ratio) / ratio;
      const double ty = static_cast<double>(iy - cy * ratio) / ratio;
      const double v00 = coarse[cy * side_c + cx];
      const double v10 = coarse[cy * side_c + cx + 1];
      const double v01 = coarse[(cy + 1) * side_c + cx];
      const double v11 = coarse[(cy + 1) * side_c + cx + 1];
      out[fine.node(ix, iy)] =
          (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
    }
  }
  return out;
}

Q1Baseline q1_baseline(const ExperimentConfig& config, const FineSetup& fine, int n_c) {
  const TwoScaleMesh coarse(n_c, 1);
  FlatInterfaceParams params = config.flat;
  params.k = config.k;
  const CoefficientField field = flat_interface(coarse, params);
  const ReferenceSolution sol = solve_reference(coarse, field, config.k, flat_interface_source(coarse, params));
  const TwoScaleMesh fine_mesh(config.n_fine, 1);
  const Eigen::VectorXd exact = Eigen::Map<const Eigen::VectorXd>(fine.exact->data(), fine.exact->size());
  Q1Baseline out;
  out.n_coarse = n_c;
  out.H = 1.0 / n_c;
  out.errors = relative_errors(fine.problem, exact, prolongate(fine_mesh, n_c, sol.u));
  return out;
}

void dump_nodes(const std::filesystem::path& path, int n_fine, const Eigen::VectorXd& v) {
  write_grid(path.string(), n_fine + 1, n_fine + 1, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

}  // namespace

FineSetup make_fine_setup(const ExperimentConfig& config) {
  const auto start = Clock::now();
  const TwoScaleMesh mesh(config.n_fine, 1);
  FineSetup s;
  switch (config.experiment) {
    case ExperimentKind::flat_interface: {
      FlatInterfaceParams params = config.flat;
      params.k = config.k;
      s.field = flat_interface(mesh, params);
      s.source = flat_interface_source(mesh, params);
      s.exact = flat_interface_exact_nodal(mesh, params);
      break;
    }
    case ExperimentKind::random_inclusions: {
      InclusionParams params = config.inclusions;
      params.seed = config.seed;
      s.field = random_inclusions(mesh, params);
      s.source = gaussian_source(mesh, config.source_center, config.source_spread, config.source_normalized);
      break;
    }
    case ExperimentKind::nim_slab:
      s.field = nim_slab(mesh);
      s.source = gaussian_source(mesh, config.source_center, config.source_spread, config.source_normalized);
      break;
    case ExperimentKind::custom: {
      s.field = load_field(config.sigma_path,
                           config.c_path.empty() ? std::nullopt : std::optional<std::string>(config.c_path));
      if (s.field.n_fine != config.n_fine) {
        throw ConfigError("custom field is " + std::to_string(s.field.n_fine) + "x" + std::to_string(s.field.n_fine) +
                          " but n_fine=" + std::to_string(config.n_fine));
      }
      if (config.f_path.empty()) {
        s.source = gaussian_source(mesh, config.source_center, config.source_spread, config.source_normalized);
      } else {
        s.source = load_source(config.f_path);
        if (s.source.n_fine != config.n_fine) throw ConfigError("custom source grid does not match n_fine");
      }
      break;
    }
  }
  s.upsilon = contrast_ratio(s.field);
  s.problem = build_fine_problem(mesh, s.field, config.k, s.source);
  s.reference = solve_reference(mesh, s.problem);
  s.seconds = seconds_since(start);
  return s;
}

std::string ReferenceCache::key(const ExperimentConfig& c) {
  // Everything that changes the fine problem; H, m, l_star and mu_msh do not.
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s|%d|%.17g|%llu|%.17g|%.17g|%.17g|%d|%d|%d|%.17g|%.17g|%.17g|%.17g|%d",
                to_string(c.experiment).c_str(), c.n_fine, c.k, static_cast<unsigned long long>(c.seed),
                c.flat.sigma_plus, c.flat.sigma_minus_mag, c.flat.gamma, c.inclusions.count, c.inclusions.min_size,
                c.inclusions.max_size, c.inclusions.sigma_minus_mag, c.source_center[0], c.source_center[1],
                c.source_spread, c.source_normalized ? 1 : 0);
  return std::string(buf) + "|" + c.sigma_path + "|" + c.c_path + "|" + c.f_path;
}

std::shared_ptr<const FineSetup> ReferenceCache::get(const ExperimentConfig& config) {
  const std::string k = key(config);
  if (auto it = entries_.find(k); it != entries_.end()) {
    ++hits_;
    return it->second;
  }
  ++misses_;
  auto setup = std::make_shared<const FineSetup>(make_fine_setup(config));
  entries_.emplace(k, setup);
  return setup;
}

bool ExperimentResult::all_ok() const {
  for (const auto& r : rows) {
    if (!r.ok) return false;
  }
  return true;
}

SolveReport run_row(const ExperimentConfig& config, const FineSetup& fine, int n_coarse, int layers, int threads,
                    Eigen::VectorXd* u_ms) {
  SolveReport r;
  r.experiment = to_string(config.experiment);
  r.n_fine = config.n_fine;
  r.n_coarse = n_coarse;
  r.H = 1.0 / n_coarse;
  r.layers = layers;
  r.l_star = config.l_star;
  r.k = config.k;
  r.mu_msh = config.mu_msh;
  r.upsilon = fine.upsilon;

  const auto start = Clock::now();
  try {
    const TwoScaleMesh mesh = build_mesh(config.n_fine, n_coarse);
    r.f_sinv = f_sinv_norm(mesh, fine.field, fine.source, config.mu_msh);

    auto t = Clock::now();
    const AuxiliarySpace aux = build_auxiliary_space(mesh, fine.field, config.l_star, config.mu_msh);
    r.seconds.aux = seconds_since(t);
    r.lambda_gap = aux.lambda_gap;
    r.rho = resolution_ratio(config.k, mesh.H(), aux.lambda_gap, config.mu_msh);
    r.rho_exceeds_threshold = r.rho > config.rho_threshold;

    t = Clock::now();
    const MultiscaleBasis basis =
        build_multiscale_basis(mesh, fine.problem, aux, layers, config.correction_weight, threads);
    r.seconds.basis = seconds_since(t);

    t = Clock::now();
    const CoarseSystem sys = assemble_coarse_system(mesh, basis, fine.problem);
    const CoarseSolution sol = solve_ms(mesh, sys, basis);
    r.seconds.coarse = seconds_since(t);

    r.errors = relative_errors(fine.problem, fine.reference.u, sol.u);
    if (fine.exact) {
      const Eigen::VectorXd exact = Eigen::Map<const Eigen::VectorXd>(fine.exact->data(), fine.exact->size());
      r.errors_exact = relative_errors(fine.problem, exact, sol.u);
    }
    if (u_ms != nullptr) *u_ms = sol.u;
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  r.seconds.total = seconds_since(start);
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config, ReferenceCache& cache, std::ostream* log) {
  ExperimentResult result;
  result.config = config;

  const auto setup = cache.get(config);
  result.reference_seconds = setup->seconds;
  if (log) *log << "reference solve: " << to_string(config.experiment) << " n_fine=" << config.n_fine << " ("
                << setup->seconds << " s)\n";

  struct Job {
    int n_coarse;
    int layers;
  };
  std::vector<Job> jobs;
  for (int nc : config.n_coarse) {
    for (int m : config.layers) jobs.push_back({nc, m});
  }
  result.rows.resize(jobs.size());
  std::vector<Eigen::VectorXd> solutions(config.dump_fields ? jobs.size() : 0);

  const int workers = worker_count(0);
  const int row_threads = config.parallel ? std::max(1, workers / static_cast<int>(jobs.size())) : workers;
  std::mutex log_mutex;
  parallel_for(static_cast<int>(jobs.size()), config.parallel ? workers : 1, [&](int idx) {
    const Job& job = jobs[idx];
    result.rows[idx] = run_row(config, *setup, job.n_coarse, job.layers, row_threads,
                               config.dump_fields ? &solutions[idx] : nullptr);
    if (log) {
      std::lock_guard lock(log_mutex);
      const SolveReport& r = result.rows[idx];
      *log << "H=1/" << job.n_coarse << " m=" << job.layers << ": ";
      if (r.ok) {
        *log << "energy " << sci(r.errors.energy) << ", L2 " << sci(r.errors.l2) << " (" << r.seconds.total << " s)\n";
      } else {
        *log << "FAILED: " << r.error << "\n";
      }
    }
  });

  if (config.experiment == ExperimentKind::flat_interface) {
    for (int nc : config.n_coarse) result.q1.push_back(q1_baseline(config, *setup, nc));
  }

  if (config.dump_fields) {
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    dump_nodes(dir / "u_ref.grid", config.n_fine, setup->reference.u);
    write_grid((dir / "sigma.grid").string(), config.n_fine, config.n_fine, setup->field.sigma);
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
      if (!result.rows[idx].ok) continue;
      const std::string tag = "nc" + std::to_string(jobs[idx].n_coarse) + "_m" + std::to_string(jobs[idx].layers);
      dump_nodes(dir / ("u_ms_" + tag + ".grid"), config.n_fine, solutions[idx]);
      dump_nodes(dir / ("abs_err_" + tag + ".grid"), config.n_fine, (solutions[idx] - setup->reference.u).cwiseAbs());
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  ReferenceCache cache;
  return run_experiment(config, cache, log);
}

std::string results_csv(const ExperimentResult& result) {
  std::string out =
      "experiment,n_coarse,H,m,l_star,k,energy_rel,l2_rel,energy_rel_exact,l2_rel_exact,lambda,upsilon,rho,rho_flag,"
      "f_sinv_norm,status\n";
  for (const auto& r : result.rows) {
    out += r.experiment + "," + std::to_string(r.n_coarse) + "," + sci(r.H) + "," + std::to_string(r.layers) + "," +
           std::to_string(r.l_star) + "," + sci(r.k) + ",";
    if (r.ok) {
      out += sci(r.errors.energy) + "," + sci(r.errors.l2) + ",";
      out += r.errors_exact ? sci(r.errors_exact->energy) + "," + sci(r.errors_exact->l2) + "," : "-,-,";
      out += sci(r.lambda_gap) + "," + sci(r.upsilon) + "," + sci(r.rho) + "," +
             (r.rho_exceeds_threshold ? "exceeds" : "ok") + "," + sci(r.f_sinv) + ",ok\n";
    } else {
      out += "-,-,-,-,-," + sci(r.upsilon) + ",-,-,-,failed: " + csv_text(r.error) + "\n";
    }
  }
  return out;
}

std::string timings_csv(const ExperimentResult& result) {
  std::string out = "n_coarse,m,seconds_reference,seconds_aux,seconds_basis,seconds_coarse,seconds_total\n";
  char buf[160];
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.3f,%.3f,%.3f,%.3f,%.3f\n", r.n_coarse, r.layers, result.reference_seconds,
                  r.seconds.aux, r.seconds.basis, r.seconds.coarse, r.seconds.total);
    out += buf;
  }
  return out;
}

std::string q1_csv(const ExperimentResult& result) {
  std::string out = "n_coarse,H,energy_rel,l2_rel\n";
  for (const auto& q : result.q1) {
    out += std::to_string(q.n_coarse) + "," + sci(q.H) + "," + sci(q.errors.energy) + "," + sci(q.errors.l2) + "\n";
  }
  return out;
}

void write_outputs(const ExperimentResult& result) {
  const std::filesystem::path dir(result.config.output_dir);
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << text;
  };
  write("results.csv", results_csv(result));
  write("timings.csv", timings_csv(result));
  write("config.resolved", echo_config(result.config));
  if (!result.q1.empty()) write("q1_baseline.csv", q1_csv(result));
}

}  // namespace signms
