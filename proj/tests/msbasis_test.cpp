#include <cmath>

#include "doctest.h"
#include "signms/assembly.hpp"
#include "signms/auxspace.hpp"
#include "signms/coarse.hpp"
#include "signms/msbasis.hpp"
#include "test_util.hpp"

using namespace signms;

namespace {

struct Setup {
  TwoScaleMesh mesh;
  CoefficientField field;
  FineProblem problem;
  AuxiliarySpace aux;

  Setup(int n, int nc, CoefficientField (*make)(const TwoScaleMesh&), double k)
      : mesh(n, nc), field(make(mesh)), problem(build_fine_problem(mesh, field, k, zero_source(mesh))),
        aux(build_auxiliary_space(mesh, field, 3)) {}
};

CoefficientField unit_field(const TwoScaleMesh& m) { return uniform_field(m, 1.0, 1.0); }
CoefficientField flat_field(const TwoScaleMesh& m) { return flat_interface(m, {}); }

// 2x2 Gauss quadrature of int mu psi_a psi_b over one element, independent of
// the assembled mass matrices.
Eigen::MatrixXd quadrature_gram(const TwoScaleMesh& mesh, const AuxiliarySpace& aux, int e) {
  const ElementEigenData& d = aux.per_element[e];
  const int l = aux.l_star;
  const double h = mesh.h();
  const double g = 0.5 / std::sqrt(3.0);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(l, l);
  for (int cy = d.box.y0; cy < d.box.y1; ++cy) {
    for (int cx = d.box.x0; cx < d.box.x1; ++cx) {
      const double mu = aux.mu[mesh.cell(cx, cy)];
      for (double qx : {0.5 - g, 0.5 + g}) {
        for (double qy : {0.5 - g, 0.5 + g}) {
          Eigen::VectorXd val(l);
          for (int a = 0; a < l; ++a) {
            auto at = [&](int ix, int iy) { return d.vectors(d.box.local(ix, iy), a); };
            val[a] = (1 - qx) * (1 - qy) * at(cx, cy) + qx * (1 - qy) * at(cx + 1, cy) +
                     (1 - qx) * qy * at(cx, cy + 1) + qx * qy * at(cx + 1, cy + 1);
          }
          out += 0.25 * h * h * mu * val * val.transpose();
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("correction blocks") {
  const Setup s(48, 8, nim_slab, 2.0);
  const Patch patch = oversample_patch(s.mesh, s.mesh.element(3, 3), 1);
  const CorrectionOperator op = correction_operator(s.aux, patch);
  REQUIRE(op.blocks.size() == 9);
  for (std::size_t t = 0; t < op.elements.size(); ++t) {
    const int e = op.elements[t];
    const bool straddles = e % 8 == 3 || e % 8 == 4;
    const Eigen::MatrixXd& g = op.blocks[t];
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    if (straddles) {
      CHECK((g - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() > 1e-3);
      CHECK((g + Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() > 1e-3);
      CHECK((g - quadrature_gram(s.mesh, s.aux, e)).cwiseAbs().maxCoeff() < 1e-10);
    } else {
      CHECK((g - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  const CorrectionOperator abs_op = correction_operator(s.aux, patch, CorrectionWeight::absolute_mu);
  for (const auto& g : abs_op.blocks) CHECK((g - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);

  const Setup neg(16, 4, [](const TwoScaleMesh& m) { return uniform_field(m, -2.0, -2.0); }, 1.0);
  const CorrectionOperator nop = correction_operator(neg.aux, oversample_patch(neg.mesh, 5, 1));
  for (const auto& g : nop.blocks) CHECK((g + Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("correction vanishes on the kernel of pi") {
  const Setup s(24, 6, nim_slab, 2.0);
  const Patch patch = oversample_patch(s.mesh, 14, 1);
  const CorrectionOperator op = correction_operator(s.aux, patch);
  const Eigen::MatrixXd p = Eigen::MatrixXd(op.projector);
  std::mt19937_64 rng(5);
  const Eigen::VectorXd v = testutil::random_vector(static_cast<int>(p.cols()), rng);
  const Eigen::VectorXd w = v - p.transpose() * (p * p.transpose()).ldlt().solve(p * v);
  CHECK((p * w).norm() < 1e-10 * (p * v).norm());
  CHECK(std::abs(op.quadratic_form(w)) < 1e-12 * std::abs(op.quadratic_form(v)));
}

TEST_CASE("basis columns") {
  const Setup s(40, 5, flat_field, 4.0);
  const MultiscaleBasis basis = build_multiscale_basis(s.mesh, s.problem, s.aux, 1);
  REQUIRE(basis.size() == 75);
  for (const BasisColumn& col : basis.columns) {
    const Patch& patch = basis.patches[col.element];
    CHECK(col.box == patch.box);
    CHECK(col.values.norm() > 0.0);
    double edge = 0.0;
    for (int iy = col.box.y0; iy <= col.box.y1; ++iy) {
      for (int ix = col.box.x0; ix <= col.box.x1; ++ix) {
        if (!patch.interior_box().contains(ix, iy)) edge = std::max(edge, std::abs(col.values[col.box.local(ix, iy)]));
      }
    }
    CHECK(edge == 0.0);
  }
  // sharded runs reproduce the serial result
  const MultiscaleBasis threaded = build_multiscale_basis(s.mesh, s.problem, s.aux, 1, CorrectionWeight::signed_mu, 3);
  for (int p = 0; p < basis.size(); ++p) CHECK((threaded.columns[p].values - basis.columns[p].values).norm() == 0.0);
}

TEST_CASE("saturated patches give the global basis") {
  const Setup s(16, 4, unit_field, 1.0);
  const GlobalBasisSolver global(s.mesh, s.problem, s.aux);
  for (int e : {0, 5, 10, 15}) {
    for (int j = 0; j < 3; ++j) {
      const Eigen::VectorXd g = global.solve(e, j);
      for (int m : {4, 6}) {
        const Eigen::VectorXd local = compute_local_basis(s.mesh, s.problem, s.aux, e, j, m);
        CHECK(energy_norm(s.problem, local - g) <= 1e-10 * energy_norm(s.problem, g));
      }
    }
  }
}

TEST_CASE("global basis is linear in the target") {
  const Setup s(16, 4, flat_field, 4.0);
  const GlobalBasisSolver global(s.mesh, s.problem, s.aux);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(s.aux.dimension());
  CHECK(global.solve_target(target).norm() == 0.0);
  target[s.aux.column(6, 2)] = -3.5;
  const Eigen::VectorXd scaled = global.solve_target(target);
  const Eigen::VectorXd unit = global.solve(6, 2);
  CHECK((scaled + 3.5 * unit).norm() <= 1e-12 * scaled.norm());

  std::mt19937_64 rng(2);
  const Eigen::VectorXd t1 = testutil::random_vector(s.aux.dimension(), rng);
  const Eigen::VectorXd t2 = testutil::random_vector(s.aux.dimension(), rng);
  const Eigen::VectorXd sum = global.solve_target(t1 + 2.0 * t2);
  CHECK((sum - global.solve_target(t1) - 2.0 * global.solve_target(t2)).norm() <= 1e-10 * sum.norm());
}

TEST_CASE("symmetric patch gives a mirror-symmetric constant-mode basis") {
  const Setup s(30, 5, unit_field, 0.5);
  const BasisColumn col = solve_patch_basis(s.mesh, s.problem, s.aux, oversample_patch(s.mesh, 12, 1))[0];
  const NodeBox& b = col.box;
  double worst = 0.0;
  for (int iy = b.y0; iy <= b.y1; ++iy) {
    for (int ix = b.x0; ix <= b.x1; ++ix) {
      const double v = col.values[b.local(ix, iy)];
      worst = std::max(worst, std::abs(v - col.values[b.local(b.x1 - (ix - b.x0), iy)]));
      worst = std::max(worst, std::abs(v - col.values[b.local(ix, b.y1 - (iy - b.y0))]));
    }
  }
  CHECK(worst < 1e-10 * col.values.cwiseAbs().maxCoeff());
}

TEST_CASE("decay profile") {
  const Setup s(24, 6, flat_field, 4.0);
  const GlobalBasisSolver global(s.mesh, s.problem, s.aux);
  const DecayProfile d = decay_profile(s.mesh, s.problem, s.aux, global, 14, 0, 6);
  REQUIRE(d.steps.size() == 6);
  for (std::size_t i = 1; i < d.steps.size(); ++i) CHECK(d.steps[i].tail_energy <= d.steps[i - 1].tail_energy);
  CHECK(d.steps.back().difference_energy <= 1e-10 * d.global_energy);
  CHECK(d.steps.back().tail_energy == 0.0);
  REQUIRE(d.theta);
  CHECK(*d.theta < 1.0);
}

TEST_CASE("geometric rate fit") {
  const auto r = fit_geometric_rate({1, 2, 3, 4}, {0.5, 0.25, 0.125, 0.0625});
  REQUIRE(r);
  CHECK(*r == doctest::Approx(0.5));
  CHECK_FALSE(fit_geometric_rate({1}, {0.3}));
  CHECK_FALSE(fit_geometric_rate({1, 2}, {0.3, 0.0}));
}
