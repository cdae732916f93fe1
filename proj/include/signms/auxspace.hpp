#pragma once

#include <vector>

#include <Eigen/Dense>

#include "signms/coeffs.hpp"
#include "signms/mesh.hpp"

namespace signms {

/// Dense local matrices of one coarse element over its closed node box
/// (no boundary conditions): |sigma| stiffness, |mu| mass and signed mu
/// mass, with mu = mu_msh * H^-2 * c.
struct ElementMatrices {
  NodeBox box;
  Eigen::MatrixXd stiffness_abs;
  Eigen::MatrixXd mass_abs;
  Eigen::MatrixXd mass_signed;
};

ElementMatrices element_matrices(const TwoScaleMesh& mesh, const CoefficientField& field, int element,
                                 double mu_msh);

/// Smallest l_* + 1 eigenpairs of the element pencil (|sigma| stiffness,
/// |mu| mass); the first l_* eigenvectors span the local auxiliary space.
struct ElementEigenData {
  int element = 0;
  NodeBox box;                       ///< local dof k <-> node box.x0 + k % w, box.y0 + k / w
  std::vector<double> eigenvalues;   ///< ascending, l_* + 1 entries
  Eigen::MatrixXd vectors;           ///< local dofs x l_*, s~-orthonormal
  Eigen::MatrixXd weighted;          ///< l_* x local dofs, rows are (S~ psi_j)^T
  Eigen::MatrixXd signed_gram;       ///< l_* x l_*, s(psi_a, psi_b) with signed mu

  std::vector<int> local_dof_map(const TwoScaleMesh& mesh) const;
};

/// Throws NumericalError naming the element when the eigensolver fails.
ElementEigenData solve_element_eigens(const TwoScaleMesh& mesh, const CoefficientField& field, int element,
                                      int l_star, double mu_msh = 24.0);

struct AuxiliarySpace {
  int l_star = 0;
  double mu_msh = 24.0;
  double lambda_gap = 0.0;  ///< min over elements of eigenvalue l_* + 1
  std::vector<ElementEigenData> per_element;
  std::vector<double> mu;   ///< signed mu per fine cell

  int dimension() const { return static_cast<int>(per_element.size()) * l_star; }
  int column(int element, int j) const { return element * l_star + j; }
};

/// Solves every element eigenproblem (elements with identical local
/// coefficients share one solve) and records the spectral gap.
AuxiliarySpace build_auxiliary_space(const TwoScaleMesh& mesh, const CoefficientField& field, int l_star,
                                     double mu_msh = 24.0);

/// Elementwise (possibly discontinuous) fine-grid function: one vector per
/// coarse element over that element's node box.
struct BrokenField {
  std::vector<Eigen::VectorXd> parts;
};

BrokenField break_field(const TwoScaleMesh& mesh, const Eigen::VectorXd& v);

/// Coefficients s~(v, psi_i^j) for every auxiliary basis vector.
Eigen::VectorXd aux_coefficients(const AuxiliarySpace& aux, const BrokenField& v);
Eigen::VectorXd aux_coefficients(const TwoScaleMesh& mesh, const AuxiliarySpace& aux, const Eigen::VectorXd& v);

/// sum_i sum_j coeffs(i, j) psi_i^j.
BrokenField aux_function(const AuxiliarySpace& aux, const Eigen::VectorXd& coeffs);

/// s~-orthogonal projection onto V_aux, applied elementwise.
BrokenField apply_pi(const AuxiliarySpace& aux, const BrokenField& v);
BrokenField apply_pi(const TwoScaleMesh& mesh, const AuxiliarySpace& aux, const Eigen::VectorXd& v);

/// s~(a, b) = sum over elements of int |mu| a b.
double s_tilde_inner(const TwoScaleMesh& mesh, const AuxiliarySpace& aux, const BrokenField& a, const BrokenField& b);

BrokenField subtract(const BrokenField& a, const BrokenField& b);

}  // namespace signms
