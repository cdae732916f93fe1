#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "signms/coeffs.hpp"
#include "signms/mesh.hpp"
#include "signms/sparse_lu.hpp"

namespace signms {

/// How a cellwise coefficient enters an assembled form.
enum class WeightMode { signed_weight, absolute_weight };

/// Q1 element matrices on a square cell, local node order (0,0), (1,0),
/// (0,1), (1,1). Stiffness is size independent in 2D; mass is for unit
/// area and scales with h^2. Integrated with 2x2 Gauss quadrature.
struct Q1Element {
  Eigen::Matrix4d stiffness;
  Eigen::Matrix4d mass;
};

const Q1Element& q1_element();

/// sum_cells w_cell * int grad v . grad w over the fine grid. Dirichlet rows
/// are kept; constraints are imposed by restriction.
SparseMatrix assemble_stiffness(const TwoScaleMesh& mesh, const CoefficientField& field, WeightMode mode);

/// sum_cells scale * w_cell * int v w with w = c or |c|.
SparseMatrix assemble_mass(const TwoScaleMesh& mesh, const CoefficientField& field, WeightMode mode,
                           double scale = 1.0);

/// Unweighted L2 mass matrix.
SparseMatrix assemble_unit_mass(const TwoScaleMesh& mesh);

/// Generic cellwise combination sum_cells (ks_cell * K + km_cell * h^2 * M).
SparseMatrix assemble_cellwise(const TwoScaleMesh& mesh, std::span<const double> stiffness_weight,
                               std::span<const double> mass_weight);

/// Consistent load vector int f v with f replaced by its nodal interpolant.
Eigen::VectorXd assemble_load(const TwoScaleMesh& mesh, const SourceField& source);

/// Principal submatrix on `dofs` (order preserved). Throws IndexError on
/// duplicate or out-of-range indices.
SparseMatrix restrict_matrix(const SparseMatrix& op, std::span<const int> dofs);
Eigen::VectorXd restrict_vector(const Eigen::VectorXd& v, std::span<const int> dofs);
/// Inverse of restrict_vector: zero vector of length `size` with `values` at `dofs`.
Eigen::VectorXd extend_vector(const Eigen::VectorXd& values, std::span<const int> dofs, int size);

/// Fine-scale operators shared by every coarse resolution of one problem.
struct FineProblem {
  double k = 0.0;
  SparseMatrix helmholtz;  ///< A_signed - k^2 M_signed, all nodes
  SparseMatrix stiffness_abs;  ///< |sigma|-weighted stiffness, the energy norm
  SparseMatrix unit_mass;
  Eigen::VectorXd load;
  std::vector<double> sigma;  ///< copies for matrix-free kernels
  std::vector<double> c;
};

FineProblem build_fine_problem(const TwoScaleMesh& mesh, const CoefficientField& field, double k,
                               const SourceField& source);

struct ReferenceSolution {
  Eigen::VectorXd u;  ///< all nodes, zero on the Dirichlet boundary
  double relative_residual = 0.0;
};

/// Direct solve of the constrained fine system. Throws SolverError for
/// (near-)singular systems or when the residual exceeds 1e-8 relative.
ReferenceSolution solve_reference(const TwoScaleMesh& mesh, const FineProblem& problem);
ReferenceSolution solve_reference(const TwoScaleMesh& mesh, const CoefficientField& field, double k,
                                  const SourceField& source);

/// Applies the Helmholtz operator to a function supported in `box` whose
/// values vanish on the box boundary; the result is supported in `box` too.
/// Both vectors are laid out row-major over the box nodes.
Eigen::VectorXd apply_helmholtz_on_box(const TwoScaleMesh& mesh, const FineProblem& problem, const NodeBox& box,
                                       const Eigen::VectorXd& values);

}  // namespace signms
