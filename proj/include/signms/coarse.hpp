#pragma once

#include <Eigen/Dense>

#include "signms/assembly.hpp"
#include "signms/auxspace.hpp"
#include "signms/coeffs.hpp"
#include "signms/msbasis.hpp"

namespace signms {

/// Galerkin system Phi^T (A - k^2 M) Phi c = Phi^T b on the multiscale space.
struct CoarseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
};

/// Entries are computed for overlapping patch pairs only; pairs whose
/// patches share no fine cell are structural zeros.
CoarseSystem assemble_coarse_system(const TwoScaleMesh& mesh, const MultiscaleBasis& basis,
                                    const FineProblem& problem);

struct CoarseSolution {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd u;  ///< fine nodal vector Phi * coefficients
  double relative_residual = 0.0;
};

/// Throws SolverError when the coarse matrix is singular or the coarse
/// residual exceeds 1e-10 relative; the message suggests raising m or l_*.
CoarseSolution solve_ms(const TwoScaleMesh& mesh, const CoarseSystem& system, const MultiscaleBasis& basis);

/// Phi * coefficients as a fine nodal vector.
Eigen::VectorXd expand_coefficients(const TwoScaleMesh& mesh, const MultiscaleBasis& basis,
                                    const Eigen::VectorXd& coefficients);

/// ||v||_a~ = (v^T A_|sigma| v)^(1/2).
double energy_norm(const FineProblem& problem, const Eigen::VectorXd& v);
/// Unweighted L2 norm of the Q1 function with nodal values v.
double l2_norm(const FineProblem& problem, const Eigen::VectorXd& v);

struct RelativeErrors {
  double energy = 0.0;
  double l2 = 0.0;
};

/// Throws DomainError when the reference has zero norm.
RelativeErrors relative_errors(const FineProblem& problem, const Eigen::VectorXd& reference,
                               const Eigen::VectorXd& approximation);

/// (int |mu|^-1 f^2)^(1/2) with mu = mu_msh H^-2 c, f its nodal interpolant.
double f_sinv_norm(const TwoScaleMesh& mesh, const CoefficientField& field, const SourceField& source,
                   double mu_msh = 24.0);

/// k^2 H^2 / (mu_msh Lambda).
double resolution_ratio(double k, double H, double lambda_gap, double mu_msh = 24.0);

}  // namespace signms
