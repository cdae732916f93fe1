#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace signms {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Fill-reducing ordering and symbolic analysis of one sparsity pattern.
/// Shared read-only between factorizations of matrices with that pattern.
class SymbolicAnalysis {
public:
  /// Analyzes the pattern of `a` (compressed) with the symmetric strategy.
  explicit SymbolicAnalysis(const SparseMatrix& a);
  ~SymbolicAnalysis();

  SymbolicAnalysis(const SymbolicAnalysis&) = delete;
  SymbolicAnalysis& operator=(const SymbolicAnalysis&) = delete;

  /// True if `a` has exactly the analyzed pattern.
  bool matches(const SparseMatrix& a) const;

private:
  friend class SparseLu;
  int n_ = 0;
  std::vector<int> outer_;
  std::vector<int> inner_;
  void* symbolic_ = nullptr;
};

/// Sparse LU with partial pivoting (UMFPACK) for general square systems,
/// including the symmetric indefinite and augmented nonsymmetric patch
/// systems. Owns the numeric factorization; solves are const and reentrant.
class SparseLu {
public:
  /// Factorizes `a` (compressed in place if needed). Throws SolverError if
  /// UMFPACK reports a singular matrix or the reciprocal condition estimate
  /// falls below `min_rcond`.
  explicit SparseLu(SparseMatrix a, double min_rcond = 1e-15);
  /// Reuses `analysis`, which must match the pattern of `a` (checked).
  SparseLu(SparseMatrix a, const SymbolicAnalysis& analysis, double min_rcond = 1e-15);
  ~SparseLu();

  SparseLu(const SparseLu&) = delete;
  SparseLu& operator=(const SparseLu&) = delete;
  SparseLu(SparseLu&& other) noexcept;
  SparseLu& operator=(SparseLu&& other) noexcept;

  Eigen::Index rows() const { return matrix_.rows(); }

  /// Solves A x = b with one step of iterative refinement.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

  /// Reciprocal condition estimate from the factorization.
  double rcond() const { return rcond_; }

private:
  void factorize(void* symbolic, double min_rcond);

  SparseMatrix matrix_;
  void* numeric_ = nullptr;
  double rcond_ = 0.0;
};

/// ||A x - b|| / ||b|| (0 when b = 0 and A x = 0).
double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

}  // namespace signms
