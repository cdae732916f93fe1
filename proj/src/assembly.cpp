#include "signms/assembly.hpp"

#include <cmath>
#include <string>

#include "signms/errors.hpp"

namespace signms {

namespace {

Q1Element make_q1_element() {
  // Bilinear shape functions on [0,1]^2, node order (0,0), (1,0), (0,1), (1,1).
  const double g = 0.5 / std::sqrt(3.0);
  const double pts[2] = {0.5 - g, 0.5 + g};
  Q1Element e;
  e.stiffness.setZero();
  e.mass.setZero();
  for (double x : pts) {
    for (double y : pts) {
      const double w = 0.25;
      const Eigen::Vector4d phi{(1 - x) * (1 - y), x * (1 - y), (1 - x) * y, x * y};
      const Eigen::Vector4d dx{-(1 - y), (1 - y), -y, y};
      const Eigen::Vector4d dy{-(1 - x), -x, (1 - x), x};
      e.stiffness += w * (dx * dx.transpose() + dy * dy.transpose());
      e.mass += w * (phi * phi.transpose());
    }
  }
  return e;
}

void check_field(const TwoScaleMesh& mesh, const CoefficientField& field) {
  if (field.n_fine != mesh.n_fine() || field.sigma.size() != static_cast<std::size_t>(mesh.num_cells()) ||
      field.c.size() != static_cast<std::size_t>(mesh.num_cells())) {
    throw ConfigError("coefficient field (n_fine=" + std::to_string(field.n_fine) +
                      ") does not match mesh (n_fine=" + std::to_string(mesh.n_fine()) + ")");
  }
}

std::vector<double> weights(std::span<const double> values, WeightMode mode, double scale) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = scale * (mode == WeightMode::absolute_weight ? std::abs(values[i]) : values[i]);
  }
  return out;
}

}  // namespace

const Q1Element& q1_element() {
  static const Q1Element element = make_q1_element();
  return element;
}

SparseMatrix assemble_cellwise(const TwoScaleMesh& mesh, std::span<const double> stiffness_weight,
                               std::span<const double> mass_weight) {
  const auto cells = static_cast<std::size_t>(mesh.num_cells());
  if ((!stiffness_weight.empty() && stiffness_weight.size() != cells) ||
      (!mass_weight.empty() && mass_weight.size() != cells)) {
    throw ConfigError("cell weight arrays must have " + std::to_string(cells) + " entries");
  }
  const Q1Element& ref = q1_element();
  const double area = mesh.h() * mesh.h();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(16 * cells);
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    Eigen::Matrix4d local = Eigen::Matrix4d::Zero();
    if (!stiffness_weight.empty()) local += stiffness_weight[cell] * ref.stiffness;
    if (!mass_weight.empty()) local += (mass_weight[cell] * area) * ref.mass;
    const auto nodes = mesh.cell_nodes(cell);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) triplets.emplace_back(nodes[a], nodes[b], local(a, b));
    }
  }
  SparseMatrix m(mesh.num_nodes(), mesh.num_nodes());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

SparseMatrix assemble_stiffness(const TwoScaleMesh& mesh, const CoefficientField& field, WeightMode mode) {
  check_field(mesh, field);
  const auto w = weights(field.sigma, mode, 1.0);
  return assemble_cellwise(mesh, w, {});
}

SparseMatrix assemble_mass(const TwoScaleMesh& mesh, const CoefficientField& field, WeightMode mode, double scale) {
  check_field(mesh, field);
  if (!(scale > 0.0)) throw ConfigError("mass scale must be positive, got " + std::to_string(scale));
  const auto w = weights(field.c, mode, scale);
  return assemble_cellwise(mesh, {}, w);
}

SparseMatrix assemble_unit_mass(const TwoScaleMesh& mesh) {
  const std::vector<double> ones(static_cast<std::size_t>(mesh.num_cells()), 1.0);
  return assemble_cellwise(mesh, {}, ones);
}

Eigen::VectorXd assemble_load(const TwoScaleMesh& mesh, const SourceField& source) {
  if (source.f.size() != static_cast<std::size_t>(mesh.num_nodes())) {
    throw ConfigError("source has " + std::to_string(source.f.size()) + " nodal values, mesh has " +
                      std::to_string(mesh.num_nodes()) + " nodes");
  }
  const Q1Element& ref = q1_element();
  const double area = mesh.h() * mesh.h();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const auto nodes = mesh.cell_nodes(cell);
    const Eigen::Vector4d f{source.f[nodes[0]], source.f[nodes[1]], source.f[nodes[2]], source.f[nodes[3]]};
    const Eigen::Vector4d contrib = area * (ref.mass * f);
    for (int a = 0; a < 4; ++a) b[nodes[a]] += contrib[a];
  }
  return b;
}

SparseMatrix restrict_matrix(const SparseMatrix& op, std::span<const int> dofs) {
  const int n = static_cast<int>(op.rows());
  std::vector<int> position(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const int d = dofs[i];
    if (d < 0 || d >= n) throw IndexError("restrict: dof " + std::to_string(d) + " out of range [0, " + std::to_string(n) + ")");
    if (position[d] >= 0) throw IndexError("restrict: duplicate dof " + std::to_string(d));
    position[d] = static_cast<int>(i);
  }
  const int m = static_cast<int>(dofs.size());
  SparseMatrix out(m, m);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int j = 0; j < m; ++j) {
    for (SparseMatrix::InnerIterator it(op, dofs[j]); it; ++it) {
      const int i = position[it.row()];
      if (i >= 0) triplets.emplace_back(i, j, it.value());
    }
  }
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Eigen::VectorXd restrict_vector(const Eigen::VectorXd& v, std::span<const int> dofs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    if (dofs[i] < 0 || dofs[i] >= v.size()) throw IndexError("restrict: dof " + std::to_string(dofs[i]) + " out of range");
    out[static_cast<Eigen::Index>(i)] = v[dofs[i]];
  }
  return out;
}

Eigen::VectorXd extend_vector(const Eigen::VectorXd& values, std::span<const int> dofs, int size) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
  for (std::size_t i = 0; i < dofs.size(); ++i) out[dofs[i]] = values[static_cast<Eigen::Index>(i)];
  return out;
}

FineProblem build_fine_problem(const TwoScaleMesh& mesh, const CoefficientField& field, double k,
                               const SourceField& source) {
  check_field(mesh, field);
  if (!(k > 0.0)) throw ConfigError("wavenumber k must be positive, got " + std::to_string(k));
  FineProblem p;
  p.k = k;
  std::vector<double> mass_w(field.c.size());
  for (std::size_t i = 0; i < mass_w.size(); ++i) mass_w[i] = -k * k * field.c[i];
  p.helmholtz = assemble_cellwise(mesh, field.sigma, mass_w);
  p.stiffness_abs = assemble_stiffness(mesh, field, WeightMode::absolute_weight);
  p.unit_mass = assemble_unit_mass(mesh);
  p.load = assemble_load(mesh, source);
  p.sigma = field.sigma;
  p.c = field.c;
  return p;
}

ReferenceSolution solve_reference(const TwoScaleMesh& mesh, const FineProblem& problem) {
  const auto& free = mesh.free_dofs();
  const SparseMatrix a = restrict_matrix(problem.helmholtz, free);
  const Eigen::VectorXd b = restrict_vector(problem.load, free);

  ReferenceSolution out;
  if (b.norm() == 0.0) {
    out.u = Eigen::VectorXd::Zero(mesh.num_nodes());
    return out;
  }
  SparseLu lu(a);
  const Eigen::VectorXd x = lu.solve(b);
  out.relative_residual = relative_residual(a, x, b);
  if (!(out.relative_residual <= 1e-8)) {
    throw SolverError("reference solve residual " + std::to_string(out.relative_residual) +
                      " exceeds 1e-8 (rcond estimate " + std::to_string(lu.rcond()) + ")");
  }
  out.u = extend_vector(x, free, mesh.num_nodes());
  return out;
}

ReferenceSolution solve_reference(const TwoScaleMesh& mesh, const CoefficientField& field, double k,
                                  const SourceField& source) {
  return solve_reference(mesh, build_fine_problem(mesh, field, k, source));
}

Eigen::VectorXd apply_helmholtz_on_box(const TwoScaleMesh& mesh, const FineProblem& problem, const NodeBox& box,
                                       const Eigen::VectorXd& values) {
  const Q1Element& ref = q1_element();
  const double area = mesh.h() * mesh.h();
  const double k2 = problem.k * problem.k;
  const int w = box.width();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(values.size());
  for (int cy = box.y0; cy < box.y1; ++cy) {
    for (int cx = box.x0; cx < box.x1; ++cx) {
      const int cell = mesh.cell(cx, cy);
      const int base = (cy - box.y0) * w + (cx - box.x0);
      const int idx[4] = {base, base + 1, base + w, base + w + 1};
      const Eigen::Vector4d x{values[idx[0]], values[idx[1]], values[idx[2]], values[idx[3]]};
      const Eigen::Vector4d y =
          problem.sigma[cell] * (ref.stiffness * x) - (k2 * problem.c[cell] * area) * (ref.mass * x);
      for (int a = 0; a < 4; ++a) out[idx[a]] += y[a];
    }
  }
  return out;
}

}  // namespace signms
