#include "signms/verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "signms/assembly.hpp"
#include "signms/auxspace.hpp"
#include "signms/coarse.hpp"
#include "signms/coeffs.hpp"
#include "signms/msbasis.hpp"

namespace signms {

namespace {

std::string fmt(const char* label, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s %.3e", label, v);
  return buf;
}

CheckResult check(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  CheckResult r{name, false, ""};
  try {
    auto [ok, detail] = body();
    r.ok = ok;
    r.detail = detail;
  } catch (const std::exception& e) {
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

}  // namespace

std::vector<CheckResult> run_self_checks() {
  std::vector<CheckResult> out;

  out.push_back(check("mesh boundary nodes", [] {
    const TwoScaleMesh mesh(8, 2);
    const auto n = mesh.dirichlet_dofs().size();
    return std::pair{n == 32, "count " + std::to_string(n)};
  }));

  out.push_back(check("stiffness kills constants", [] {
    const TwoScaleMesh mesh(8, 2);
    const SparseMatrix a = assemble_stiffness(mesh, uniform_field(mesh, 2.0, 1.0), WeightMode::signed_weight);
    const double r = (a * Eigen::VectorXd::Ones(mesh.num_nodes())).cwiseAbs().maxCoeff();
    return std::pair{r < 1e-12, fmt("max |A 1|", r)};
  }));

  out.push_back(check("unit mass integrates to 1", [] {
    const TwoScaleMesh mesh(8, 2);
    const double s = assemble_unit_mass(mesh).sum();
    return std::pair{std::abs(s - 1.0) < 1e-12, fmt("sum", s)};
  }));

  out.push_back(check("flat interface exact solution", [] {
    const TwoScaleMesh mesh(80, 1);
    const FlatInterfaceParams params;
    const CoefficientField field = flat_interface(mesh, params);
    const FineProblem problem = build_fine_problem(mesh, field, params.k, flat_interface_source(mesh, params));
    const ReferenceSolution ref = solve_reference(mesh, problem);
    const auto exact = flat_interface_exact_nodal(mesh, params);
    const Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(exact.data(), exact.size());
    const double e = relative_errors(problem, u, ref.u).l2;
    return std::pair{e < 1e-2, fmt("relative L2", e)};
  }));

  out.push_back(check("auxiliary basis orthonormal", [] {
    const TwoScaleMesh mesh(16, 4);
    const CoefficientField field = flat_interface(mesh, {});
    const AuxiliarySpace aux = build_auxiliary_space(mesh, field, 3);
    double worst = 0.0;
    for (const auto& d : aux.per_element) {
      const Eigen::MatrixXd g = d.weighted * d.vectors;
      worst = std::max(worst, (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
    }
    return std::pair{worst < 1e-10, fmt("max |Psi^T S Psi - I|", worst)};
  }));

  out.push_back(check("projection idempotent", [] {
    const TwoScaleMesh mesh(16, 4);
    const AuxiliarySpace aux = build_auxiliary_space(mesh, nim_slab(mesh), 3);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(mesh.num_nodes());
    for (auto& x : v) x = normal(rng);
    const BrokenField p1 = apply_pi(mesh, aux, v);
    const BrokenField p2 = apply_pi(aux, p1);
    const BrokenField d = subtract(p1, p2);
    const double r = std::sqrt(s_tilde_inner(mesh, aux, d, d) / s_tilde_inner(mesh, aux, p1, p1));
    return std::pair{r < 1e-10, fmt("relative change", r)};
  }));

  out.push_back(check("saturated local basis equals global basis", [] {
    const TwoScaleMesh mesh(16, 4);
    const CoefficientField field = uniform_field(mesh, 1.0, 1.0);
    const FineProblem problem = build_fine_problem(mesh, field, 1.0, zero_source(mesh));
    const AuxiliarySpace aux = build_auxiliary_space(mesh, field, 3);
    const Eigen::VectorXd local = compute_local_basis(mesh, problem, aux, 5, 1, 4);
    const Eigen::VectorXd global = compute_global_basis(mesh, problem, aux, 5, 1);
    const double r = (local - global).norm() / global.norm();
    return std::pair{r < 1e-10, fmt("relative difference", r)};
  }));

  out.push_back(check("coarse matrix symmetric", [] {
    const TwoScaleMesh mesh(24, 6);
    const CoefficientField field = nim_slab(mesh);
    const FineProblem problem = build_fine_problem(mesh, field, 2.0, gaussian_source(mesh, {0.0, 0.5}, 0.05, false));
    const AuxiliarySpace aux = build_auxiliary_space(mesh, field, 3);
    const MultiscaleBasis basis = build_multiscale_basis(mesh, problem, aux, 1);
    const CoarseSystem sys = assemble_coarse_system(mesh, basis, problem);
    const SparseMatrix diff = sys.matrix - SparseMatrix(sys.matrix.transpose());
    const double r = diff.norm() / sys.matrix.norm();
    return std::pair{r < 1e-13, fmt("relative asymmetry", r)};
  }));

  out.push_back(check("multiscale solve on the flat interface", [] {
    const TwoScaleMesh mesh(40, 8);
    const FlatInterfaceParams params;
    const CoefficientField field = flat_interface(mesh, params);
    const FineProblem problem = build_fine_problem(mesh, field, params.k, flat_interface_source(mesh, params));
    const ReferenceSolution ref = solve_reference(mesh, problem);
    const AuxiliarySpace aux = build_auxiliary_space(mesh, field, 3);
    const MultiscaleBasis basis = build_multiscale_basis(mesh, problem, aux, 3);
    const CoarseSolution sol = solve_ms(mesh, assemble_coarse_system(mesh, basis, problem), basis);
    const double e = relative_errors(problem, ref.u, sol.u).energy;
    return std::pair{e < 5e-2, fmt("relative energy error", e)};
  }));

  return out;
}

}  // namespace signms
