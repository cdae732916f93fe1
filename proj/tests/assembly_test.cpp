#include <cmath>
#include <numbers>

#include "doctest.h"
#include "signms/assembly.hpp"
#include "signms/coarse.hpp"
#include "signms/errors.hpp"
#include "test_util.hpp"

using namespace signms;

namespace {

Eigen::VectorXd interpolate(const TwoScaleMesh& mesh, auto fn) {
  Eigen::VectorXd v(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const auto p = mesh.node_point(i);
    v[i] = fn(p[0], p[1]);
  }
  return v;
}

}  // namespace

TEST_CASE("reference element matrices") {
  const Q1Element& q = q1_element();
  Eigen::Matrix4d k;
  k << 4, -1, -1, -2, -1, 4, -2, -1, -1, -2, 4, -1, -2, -1, -1, 4;
  Eigen::Matrix4d m;
  m << 4, 2, 2, 1, 2, 4, 1, 2, 2, 1, 4, 2, 1, 2, 2, 4;
  CHECK((q.stiffness - k / 6.0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((q.mass - m / 36.0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("stiffness") {
  const TwoScaleMesh small(2, 1);
  const SparseMatrix a = assemble_stiffness(small, uniform_field(small, 1.0, 1.0), WeightMode::signed_weight);
  CHECK(a.coeff(small.node(1, 1), small.node(1, 1)) == doctest::Approx(8.0 / 3.0));

  const TwoScaleMesh mesh(16, 4);
  const CoefficientField flat = flat_interface(mesh, {});
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.num_nodes());
  for (auto mode : {WeightMode::signed_weight, WeightMode::absolute_weight}) {
    CHECK((assemble_stiffness(mesh, flat, mode) * ones).cwiseAbs().maxCoeff() < 1e-12);
  }

  // |grad (y - 1/2)|^2 = 1: signed form 1/2 - 3/2, absolute form 1/2 + 3/2
  const Eigen::VectorXd v = interpolate(mesh, [](double, double y) { return y - 0.5; });
  CHECK(v.dot(assemble_stiffness(mesh, flat, WeightMode::signed_weight) * v) == doctest::Approx(-1.0));
  CHECK(v.dot(assemble_stiffness(mesh, flat, WeightMode::absolute_weight) * v) == doctest::Approx(2.0));

  // nodal interpolant of x on sigma = 1
  const Eigen::VectorXd x = interpolate(mesh, [](double a, double) { return a; });
  const FineProblem p = build_fine_problem(mesh, uniform_field(mesh, 1.0, 1.0), 1.0, zero_source(mesh));
  CHECK(energy_norm(p, x) == doctest::Approx(1.0));
}

TEST_CASE("mass") {
  const TwoScaleMesh mesh(20, 1);
  const CoefficientField unit = uniform_field(mesh, 1.0, 1.0);
  const SparseMatrix m = assemble_mass(mesh, unit, WeightMode::absolute_weight, 1.0);
  CHECK(m.sum() == doctest::Approx(1.0));
  CHECK((assemble_unit_mass(mesh) - m).norm() < 1e-15);

  const SparseMatrix scaled = assemble_mass(mesh, unit, WeightMode::absolute_weight, 24.0 * 400.0);
  CHECK((scaled - 9600.0 * m).norm() < 1e-12 * scaled.norm());

  const TwoScaleMesh fine(48, 1);
  const CoefficientField slab = nim_slab(fine);
  Eigen::VectorXd bump = Eigen::VectorXd::Zero(fine.num_nodes());
  bump[fine.node(24, 20)] = 1.0;
  CHECK(bump.dot(assemble_mass(fine, slab, WeightMode::signed_weight, 1.0) * bump) < 0.0);
  CHECK(bump.dot(assemble_mass(fine, slab, WeightMode::absolute_weight, 1.0) * bump) > 0.0);

  CHECK_THROWS_AS(assemble_mass(mesh, unit, WeightMode::absolute_weight, 0.0), ConfigError);
  CHECK_THROWS_AS(assemble_stiffness(mesh, uniform_field(TwoScaleMesh(10, 1), 1.0, 1.0), WeightMode::signed_weight),
                  ConfigError);
}

TEST_CASE("load vector") {
  const TwoScaleMesh mesh(16, 1);
  CHECK(assemble_load(mesh, zero_source(mesh)).norm() == 0.0);
  SourceField one{16, std::vector<double>(mesh.num_nodes(), 1.0)};
  CHECK(assemble_load(mesh, one).sum() == doctest::Approx(1.0));

  // b_i / h^2 against f at the node
  const FlatInterfaceParams p;
  auto defect = [&](int n) {
    const TwoScaleMesh m(n, 1);
    const Eigen::VectorXd b = assemble_load(m, flat_interface_source(m, p));
    double worst = 0.0;
    for (int node : m.free_dofs()) {
      worst = std::max(worst, std::abs(b[node] * n * n - flat_interface_exact(m.node_point(node), p).f));
    }
    return worst;
  };
  const double d1 = defect(20);
  const double d2 = defect(40);
  CHECK(std::log2(d1 / d2) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("restriction") {
  const TwoScaleMesh mesh(4, 1);
  const SparseMatrix a = assemble_stiffness(mesh, uniform_field(mesh, 1.0, 1.0), WeightMode::signed_weight);
  const auto& free = mesh.free_dofs();
  const SparseMatrix r = restrict_matrix(a, free);
  CHECK(r.rows() == 9);
  CHECK(r.coeff(0, 0) == a.coeff(free[0], free[0]));
  CHECK(restrict_matrix(a, std::vector<int>{}).rows() == 0);
  CHECK_THROWS_AS(restrict_matrix(a, std::vector<int>{1, 1}), IndexError);
  CHECK_THROWS_AS(restrict_matrix(a, std::vector<int>{0, 25}), IndexError);

  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(25, 0, 24);
  CHECK(extend_vector(restrict_vector(v, free), free, 25)[free[3]] == v[free[3]]);
}

TEST_CASE("reference solve") {
  const TwoScaleMesh mesh(16, 1);
  const CoefficientField unit = uniform_field(mesh, 1.0, 1.0);
  CHECK(solve_reference(mesh, unit, 1.0, zero_source(mesh)).u.norm() == 0.0);

  // sin(pi x) sin(pi y): second-order L2 convergence
  const double pi = std::numbers::pi;
  auto l2_error = [&](int n) {
    const TwoScaleMesh m(n, 1);
    SourceField f{n, {}};
    const Eigen::VectorXd exact = interpolate(m, [&](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    f.f.assign(exact.data(), exact.data() + exact.size());
    for (double& v : f.f) v *= 2 * pi * pi - 1.0;
    const FineProblem prob = build_fine_problem(m, uniform_field(m, 1.0, 1.0), 1.0, f);
    const ReferenceSolution ref = solve_reference(m, prob);
    CHECK(ref.relative_residual < 1e-10);
    return relative_errors(prob, exact, ref.u).l2;
  };
  CHECK(std::log2(l2_error(16) / l2_error(32)) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("resonant system is rejected") {
  // smallest discrete Dirichlet eigenvalue of the Q1 pencil on a 4 x 4 grid
  const double h = 0.25;
  const double lambda_1d = 6.0 / (h * h) * (1 - std::cos(std::numbers::pi * h)) / (2 + std::cos(std::numbers::pi * h));
  const TwoScaleMesh mesh(4, 1);
  const SourceField one{4, std::vector<double>(mesh.num_nodes(), 1.0)};
  CHECK_THROWS_AS(solve_reference(mesh, uniform_field(mesh, 1.0, 1.0), std::sqrt(2 * lambda_1d), one), SolverError);
}

TEST_CASE("matrix-free box operator matches the assembled one") {
  const TwoScaleMesh mesh(24, 4);
  const FineProblem p = build_fine_problem(mesh, nim_slab(mesh), 3.0, zero_source(mesh));
  const NodeBox box{5, 17, 2, 12};
  std::mt19937_64 rng(1);
  Eigen::VectorXd local = testutil::random_vector(box.count(), rng);
  for (int iy = box.y0; iy <= box.y1; ++iy) {
    for (int ix = box.x0; ix <= box.x1; ++ix) {
      if (ix == box.x0 || ix == box.x1 || iy == box.y0 || iy == box.y1) local[box.local(ix, iy)] = 0.0;
    }
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int iy = box.y0; iy <= box.y1; ++iy) {
    for (int ix = box.x0; ix <= box.x1; ++ix) full[mesh.node(ix, iy)] = local[box.local(ix, iy)];
  }
  const Eigen::VectorXd expect = p.helmholtz * full;
  const Eigen::VectorXd got = apply_helmholtz_on_box(mesh, p, box, local);
  double worst = 0.0;
  for (int iy = box.y0; iy <= box.y1; ++iy) {
    for (int ix = box.x0; ix <= box.x1; ++ix) {
      worst = std::max(worst, std::abs(got[box.local(ix, iy)] - expect[mesh.node(ix, iy)]));
    }
  }
  CHECK(worst < 1e-12 * expect.cwiseAbs().maxCoeff());
}
