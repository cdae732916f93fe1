#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "signms/assembly.hpp"
#include "signms/auxspace.hpp"
#include "signms/mesh.hpp"
#include "signms/sparse_lu.hpp"

namespace signms {

/// Weight used for mu inside s(pi ., pi .) of the basis problems. Auxiliary
/// vectors are always orthonormal in the |mu| inner product.
enum class CorrectionWeight { signed_mu, absolute_mu };

/// The low-rank term w -> s(pi phi, pi w) restricted to a patch.
///
/// `projector` (P) maps a vector on the patch interior dofs to the
/// s~-coefficients against every psi of every element in the patch;
/// `blocks[e]` is the l_* x l_* Gram block G_e = s(psi_e^a, psi_e^b).
/// The correction is P^T G P and the right-hand side for psi_i^j is
/// P^T G e_(i,j).
struct CorrectionOperator {
  int l_star = 0;
  std::vector<int> elements;           ///< patch elements, ascending
  SparseMatrix projector;              ///< (|elements| * l_star) x interior dofs
  std::vector<Eigen::MatrixXd> blocks; ///< one per entry of `elements`

  int rows() const { return static_cast<int>(projector.rows()); }
  /// Row of (element, j) in the projector, or -1 if the element is not in the patch.
  int row(int element, int j) const;
  Eigen::VectorXd rhs(int element, int j) const;
  /// (P w)^T G (P w).
  double quadratic_form(const Eigen::VectorXd& w) const;
};

CorrectionOperator correction_operator(const AuxiliarySpace& aux, const Patch& patch,
                                       CorrectionWeight weight = CorrectionWeight::signed_mu);

/// One basis function stored densely over the node box of its patch;
/// values on the box boundary are exactly zero.
struct BasisColumn {
  int element = 0;
  int j = 0;
  NodeBox box;
  Eigen::VectorXd values;

  Eigen::VectorXd to_fine(const TwoScaleMesh& mesh) const;
};

struct MultiscaleBasis {
  int l_star = 0;
  int layers = 0;                   ///< oversampling layers m
  std::vector<BasisColumn> columns; ///< index element * l_star + j
  std::vector<Patch> patches;       ///< one per coarse element

  int size() const { return static_cast<int>(columns.size()); }
};

/// Failure of one patch problem, reported per (element, layers).
struct PatchFailure {
  int element = 0;
  int layers = 0;
  std::string message;
};

/// Solves the l_* basis problems of one patch with a single factorization of
///   [ B_pp   P^T G ] [x]   [P^T G e_(i,j)]
///   [ P      -I    ] [q] = [      0      ]
/// which equals (B_pp + P^T G P) x = P^T G e_(i,j) without forming the dense
/// correction. Throws SolverError identifying (i, m) on singular systems or
/// residuals above 1e-8.
std::vector<BasisColumn> solve_patch_basis(const TwoScaleMesh& mesh, const FineProblem& problem,
                                           const AuxiliarySpace& aux, const Patch& patch,
                                           CorrectionWeight weight = CorrectionWeight::signed_mu);

/// Builds every localized basis function. Patches run on up to `threads`
/// workers. Patch failures are collected and rethrown together as one
/// SolverError listing every failed (i, m).
MultiscaleBasis build_multiscale_basis(const TwoScaleMesh& mesh, const FineProblem& problem,
                                       const AuxiliarySpace& aux, int layers,
                                       CorrectionWeight weight = CorrectionWeight::signed_mu, int threads = 1);

Eigen::VectorXd compute_local_basis(const TwoScaleMesh& mesh, const FineProblem& problem, const AuxiliarySpace& aux,
                                    int element, int j, int layers,
                                    CorrectionWeight weight = CorrectionWeight::signed_mu);

/// Global basis functions: the same problem posed on the whole domain. The
/// factorization is shared by every (i, j).
class GlobalBasisSolver {
public:
  GlobalBasisSolver(const TwoScaleMesh& mesh, const FineProblem& problem, const AuxiliarySpace& aux,
                    CorrectionWeight weight = CorrectionWeight::signed_mu);
  ~GlobalBasisSolver();

  Eigen::VectorXd solve(int element, int j) const;
  /// Global basis for an arbitrary target sum_(e,a) target(e,a) psi_e^a.
  Eigen::VectorXd solve_target(const Eigen::VectorXd& target) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd compute_global_basis(const TwoScaleMesh& mesh, const FineProblem& problem, const AuxiliarySpace& aux,
                                     int element, int j, CorrectionWeight weight = CorrectionWeight::signed_mu);

struct DecayStep {
  int layers = 0;
  double difference_energy = 0.0;  ///< ||phi_glo - phi_m||_a~
  double tail_energy = 0.0;        ///< ||phi_glo||_a~ on Omega \ K_i^m
};

struct DecayProfile {
  int element = 0;
  int j = 0;
  double global_energy = 0.0;
  std::vector<DecayStep> steps;
  /// exp(slope) of a least-squares fit of log(tail_energy) against m;
  /// absent when fewer than two positive tail values exist.
  std::optional<double> theta;
  /// Same fit applied to difference_energy.
  std::optional<double> theta_difference;
};

DecayProfile decay_profile(const TwoScaleMesh& mesh, const FineProblem& problem, const AuxiliarySpace& aux,
                           const GlobalBasisSolver& global, int element, int j, int m_max,
                           CorrectionWeight weight = CorrectionWeight::signed_mu);

/// |sigma|-weighted energy of v restricted to fine cells outside `box`.
double energy_outside(const TwoScaleMesh& mesh, const FineProblem& problem, const Eigen::VectorXd& v,
                      const NodeBox& box);

/// Geometric rate exp(slope) of log(values) vs. index, or nullopt.
std::optional<double> fit_geometric_rate(const std::vector<int>& index, const std::vector<double>& values);

}  // namespace signms
