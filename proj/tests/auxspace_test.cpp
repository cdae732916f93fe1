#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "signms/assembly.hpp"
#include "signms/auxspace.hpp"
#include "signms/coarse.hpp"
#include "signms/errors.hpp"
#include "test_util.hpp"

using namespace signms;

namespace {

double s_norm2(const TwoScaleMesh& mesh, const AuxiliarySpace& aux, const BrokenField& v) {
  return s_tilde_inner(mesh, aux, v, v);
}

}  // namespace

TEST_CASE("uniform element has a constant null vector") {
  const TwoScaleMesh mesh(40, 2);
  const ElementEigenData d = solve_element_eigens(mesh, uniform_field(mesh, 1.0, 1.0), 0, 3);
  REQUIRE(d.eigenvalues.size() == 4);
  CHECK(std::abs(d.eigenvalues[0]) < 1e-10 * d.eigenvalues[3]);
  const Eigen::VectorXd v0 = d.vectors.col(0);
  CHECK((v0.array() - v0[0]).abs().maxCoeff() < 1e-8 * std::abs(v0[0]));
  CHECK(v0[0] > 0);
  CHECK(std::is_sorted(d.eigenvalues.begin(), d.eigenvalues.end()));
}

TEST_CASE("element spectrum matches a dense generalized solve") {
  const TwoScaleMesh mesh(60, 3);
  for (const CoefficientField& field : {flat_interface(mesh, {}), nim_slab(mesh), uniform_field(mesh, 2.0, 5.0)}) {
    for (int e : {0, 4, 7}) {
      const ElementMatrices em = element_matrices(mesh, field, e, 24.0);
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(em.stiffness_abs, em.mass_abs);
      const ElementEigenData d = solve_element_eigens(mesh, field, e, 3);
      const double top = dense.eigenvalues()[3];
      for (int j = 0; j < 4; ++j) CHECK(std::abs(d.eigenvalues[j] - dense.eigenvalues()[j]) <= 1e-9 * top);
      // s~-orthonormal and eigen-residual small
      const Eigen::MatrixXd gram = d.vectors.transpose() * em.mass_abs * d.vectors;
      CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((d.weighted - d.vectors.transpose() * em.mass_abs).cwiseAbs().maxCoeff() < 1e-10 * em.mass_abs.norm());
      const Eigen::MatrixXd signed_gram = d.vectors.transpose() * em.mass_signed * d.vectors;
      CHECK((signed_gram - d.signed_gram).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("scaling sigma and c together leaves the spectrum unchanged") {
  const TwoScaleMesh mesh(40, 4);
  CoefficientField a = nim_slab(mesh);
  CoefficientField b = a;
  for (auto& s : b.sigma) s *= 7.5;
  for (auto& c : b.c) c *= 7.5;
  for (int e : {0, 5, 9}) {
    const auto da = solve_element_eigens(mesh, a, e, 3);
    const auto db = solve_element_eigens(mesh, b, e, 3);
    for (int j = 0; j < 4; ++j) CHECK(db.eigenvalues[j] == doctest::Approx(da.eigenvalues[j]).epsilon(1e-9));
  }
}

TEST_CASE("element data depends only on its own cells") {
  const TwoScaleMesh mesh(40, 4);
  CoefficientField a = flat_interface(mesh, {});
  CoefficientField b = a;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    if (mesh.element_of_cell(cell) != 5) b.sigma[cell] = b.c[cell] = 42.0;
  }
  const auto da = solve_element_eigens(mesh, a, 5, 3);
  const auto db = solve_element_eigens(mesh, b, 5, 3);
  CHECK(da.eigenvalues == db.eigenvalues);
  CHECK((da.vectors - db.vectors).norm() == 0.0);
}

TEST_CASE("auxiliary space") {
  const TwoScaleMesh one(20, 1);
  CHECK(build_auxiliary_space(one, flat_interface(one, {}), 3).dimension() == 3);

  const TwoScaleMesh mesh(40, 4);
  const AuxiliarySpace aux = build_auxiliary_space(mesh, flat_interface(mesh, {}), 3);
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& d : aux.per_element) gap = std::min(gap, d.eigenvalues[3]);
  CHECK(aux.lambda_gap == gap);
  CHECK(aux.lambda_gap > 0.0);
  CHECK(aux.dimension() == 48);

  // the cache must reproduce a fresh solve exactly
  const auto direct = solve_element_eigens(mesh, flat_interface(mesh, {}), 13, 3);
  CHECK(direct.eigenvalues == aux.per_element[13].eigenvalues);
  CHECK((direct.vectors - aux.per_element[13].vectors).norm() == 0.0);

  const TwoScaleMesh tiny(4, 4);
  CHECK_THROWS_AS(build_auxiliary_space(tiny, uniform_field(tiny, 1.0, 1.0), 4), ConfigError);
}

TEST_CASE("projection properties") {
  const TwoScaleMesh mesh(32, 4);
  const CoefficientField field = nim_slab(mesh);
  const AuxiliarySpace aux = build_auxiliary_space(mesh, field, 3);
  const FineProblem problem = build_fine_problem(mesh, field, 1.0, zero_source(mesh));
  std::mt19937_64 rng(11);

  SUBCASE("identity on the auxiliary space") {
    const Eigen::VectorXd coeffs = testutil::random_vector(aux.dimension(), rng);
    const BrokenField w = aux_function(aux, coeffs);
    const BrokenField d = subtract(apply_pi(aux, w), w);
    CHECK(std::sqrt(s_norm2(mesh, aux, d) / s_norm2(mesh, aux, w)) < 1e-10);
    CHECK((aux_coefficients(aux, w) - coeffs).norm() < 1e-10 * coeffs.norm());
  }

  SUBCASE("idempotent, self-adjoint, best approximation, gap bound") {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd u = testutil::random_vector(mesh.num_nodes(), rng);
      const Eigen::VectorXd v = testutil::random_vector(mesh.num_nodes(), rng);
      const BrokenField bu = break_field(mesh, u);
      const BrokenField bv = break_field(mesh, v);
      const BrokenField pv = apply_pi(aux, bv);
      const double scale = s_norm2(mesh, aux, bv);

      CHECK(std::sqrt(s_norm2(mesh, aux, subtract(apply_pi(aux, pv), pv)) / scale) < 1e-10);
      const double lhs = s_tilde_inner(mesh, aux, apply_pi(aux, bu), bv);
      const double rhs = s_tilde_inner(mesh, aux, bu, pv);
      CHECK(std::abs(lhs - rhs) < 1e-10 * std::sqrt(scale * s_norm2(mesh, aux, bu)));

      const double best = s_norm2(mesh, aux, subtract(bv, pv));
      const BrokenField other = aux_function(aux, testutil::random_vector(aux.dimension(), rng));
      CHECK(best <= s_norm2(mesh, aux, subtract(bv, other)));

      const double energy = v.dot(problem.stiffness_abs * v);
      CHECK(best <= energy / aux.lambda_gap * (1 + 1e-10));
    }
  }

  SUBCASE("acts element by element") {
    const Eigen::VectorXd v = testutil::random_vector(mesh.num_nodes(), rng);
    Eigen::VectorXd masked = Eigen::VectorXd::Zero(mesh.num_nodes());
    const NodeBox box = mesh.element_box(6);
    for (int iy = box.y0; iy <= box.y1; ++iy) {
      for (int ix = box.x0; ix <= box.x1; ++ix) masked[mesh.node(ix, iy)] = v[mesh.node(ix, iy)];
    }
    CHECK((apply_pi(mesh, aux, v).parts[6] - apply_pi(mesh, aux, masked).parts[6]).norm() < 1e-12 * v.norm());
  }
}
