#include "signms/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "signms/errors.hpp"

namespace signms {

namespace {

// sum over the common nodes of two box-stored vectors.
double box_dot(const NodeBox& box_a, const Eigen::VectorXd& a, const NodeBox& box_b, const Eigen::VectorXd& b) {
  const NodeBox common = intersect(box_a, box_b);
  if (common.count() == 0) return 0.0;
  double sum = 0.0;
  const int len = common.width();
  for (int iy = common.y0; iy <= common.y1; ++iy) {
    sum += a.segment(box_a.local(common.x0, iy), len).dot(b.segment(box_b.local(common.x0, iy), len));
  }
  return sum;
}

bool ranges_overlap(const Patch& p, const Patch& q) {
  return p.ex0 <= q.ex1 && q.ex0 <= p.ex1 && p.ey0 <= q.ey1 && q.ey0 <= p.ey1;
}

}  // namespace

CoarseSystem assemble_coarse_system(const TwoScaleMesh& mesh, const MultiscaleBasis& basis,
                                    const FineProblem& problem) {
  const int n = basis.size();
  const int l = basis.l_star;
  if (n == 0 || static_cast<int>(basis.patches.size()) * l != n) {
    throw Error("internal: multiscale basis has " + std::to_string(n) + " columns for " +
                std::to_string(basis.patches.size()) + " patches");
  }
  if (problem.load.size() != mesh.num_nodes()) throw Error("internal: load vector size mismatch");

  CoarseSystem sys;
  sys.rhs.resize(n);
  std::vector<Eigen::Triplet<double>> triplets;
  const int nc = mesh.n_coarse();
  const int reach = 2 * basis.layers;

  for (int p = 0; p < n; ++p) {
    const BasisColumn& col_p = basis.columns[p];
    const Patch& patch_p = basis.patches[col_p.element];
    const Eigen::VectorXd b_phi = apply_helmholtz_on_box(mesh, problem, col_p.box, col_p.values);

    double load = 0.0;
    for (int iy = col_p.box.y0; iy <= col_p.box.y1; ++iy) {
      for (int ix = col_p.box.x0; ix <= col_p.box.x1; ++ix) {
        load += col_p.values[col_p.box.local(ix, iy)] * problem.load[mesh.node(ix, iy)];
      }
    }
    sys.rhs[p] = load;

    const int ex = col_p.element % nc;
    const int ey = col_p.element / nc;
    for (int qy = std::max(0, ey - reach); qy <= std::min(nc - 1, ey + reach); ++qy) {
      for (int qx = std::max(0, ex - reach); qx <= std::min(nc - 1, ex + reach); ++qx) {
        const int eq = mesh.element(qx, qy);
        if (!ranges_overlap(patch_p, basis.patches[eq])) continue;
        for (int j = 0; j < l; ++j) {
          const int q = eq * l + j;
          if (q < p) continue;
          const BasisColumn& col_q = basis.columns[q];
          const double v = box_dot(col_p.box, b_phi, col_q.box, col_q.values);
          triplets.emplace_back(q, p, v);
          if (q != p) triplets.emplace_back(p, q, v);
        }
      }
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

Eigen::VectorXd expand_coefficients(const TwoScaleMesh& mesh, const MultiscaleBasis& basis,
                                    const Eigen::VectorXd& coefficients) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int p = 0; p < basis.size(); ++p) {
    const BasisColumn& col = basis.columns[p];
    const double cp = coefficients[p];
    if (cp == 0.0) continue;
    int k = 0;
    for (int iy = col.box.y0; iy <= col.box.y1; ++iy) {
      for (int ix = col.box.x0; ix <= col.box.x1; ++ix) u[mesh.node(ix, iy)] += cp * col.values[k++];
    }
  }
  return u;
}

CoarseSolution solve_ms(const TwoScaleMesh& mesh, const CoarseSystem& system, const MultiscaleBasis& basis) {
  CoarseSolution out;
  if (system.rhs.norm() == 0.0) {
    out.coefficients = Eigen::VectorXd::Zero(system.rhs.size());
    out.u = Eigen::VectorXd::Zero(mesh.num_nodes());
    return out;
  }
  try {
    SparseLu lu(system.matrix);
    out.coefficients = lu.solve(system.rhs);
  } catch (const SolverError& e) {
    throw SolverError(std::string("coarse multiscale system: ") + e.what() +
                      "; the multiscale space may violate the inf-sup condition, try more oversampling layers m "
                      "or more basis functions l_star");
  }
  out.relative_residual = relative_residual(system.matrix, out.coefficients, system.rhs);
  if (!(out.relative_residual <= 1e-10)) {
    throw SolverError("coarse multiscale system residual " + std::to_string(out.relative_residual) +
                      " exceeds 1e-10; try more oversampling layers m or more basis functions l_star");
  }
  out.u = expand_coefficients(mesh, basis, out.coefficients);
  return out;
}

double energy_norm(const FineProblem& problem, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(problem.stiffness_abs * v)));
}

double l2_norm(const FineProblem& problem, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(problem.unit_mass * v)));
}

RelativeErrors relative_errors(const FineProblem& problem, const Eigen::VectorXd& reference,
                               const Eigen::VectorXd& approximation) {
  const double ref_a = energy_norm(problem, reference);
  const double ref_l2 = l2_norm(problem, reference);
  if (ref_a == 0.0 || ref_l2 == 0.0) throw DomainError("relative error undefined: reference solution has zero norm");
  const Eigen::VectorXd e = reference - approximation;
  return {energy_norm(problem, e) / ref_a, l2_norm(problem, e) / ref_l2};
}

double f_sinv_norm(const TwoScaleMesh& mesh, const CoefficientField& field, const SourceField& source,
                   double mu_msh) {
  const Q1Element& ref = q1_element();
  const double area = mesh.h() * mesh.h();
  const double scale = mu_msh / (mesh.H() * mesh.H());
  double sum = 0.0;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const auto nodes = mesh.cell_nodes(cell);
    const Eigen::Vector4d f{source.f[nodes[0]], source.f[nodes[1]], source.f[nodes[2]], source.f[nodes[3]]};
    sum += area / (scale * std::abs(field.c[cell])) * f.dot(ref.mass * f);
  }
  return std::sqrt(sum);
}

double resolution_ratio(double k, double H, double lambda_gap, double mu_msh) {
  return k * k * H * H / (mu_msh * lambda_gap);
}

}  // namespace signms
