#include "signms/sparse_lu.hpp"

#include <umfpack.h>

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>

#include "signms/errors.hpp"

namespace signms {

namespace {

std::string status_text(int status) {
  switch (status) {
    case UMFPACK_WARNING_singular_matrix: return "matrix is singular";
    case UMFPACK_ERROR_out_of_memory: return "out of memory";
    case UMFPACK_ERROR_invalid_matrix: return "invalid matrix structure";
    case UMFPACK_ERROR_different_pattern: return "pattern changed";
    default: return "UMFPACK status " + std::to_string(status);
  }
}

}  // namespace

SymbolicAnalysis::SymbolicAnalysis(const SparseMatrix& a) : n_(static_cast<int>(a.rows())) {
  if (a.rows() != a.cols() || !a.isCompressed()) throw SolverError("SymbolicAnalysis: matrix must be square and compressed");
  outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + n_ + 1);
  inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
  if (n_ == 0) return;
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  // the patch systems have a zero-free diagonal and a symmetric pattern
  control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  const int status =
      umfpack_di_symbolic(n_, n_, outer_.data(), inner_.data(), a.valuePtr(), &symbolic_, control, info);
  if (status != UMFPACK_OK) {
    umfpack_di_free_symbolic(&symbolic_);
    throw SolverError("sparse LU symbolic analysis failed: " + status_text(status));
  }
}

SymbolicAnalysis::~SymbolicAnalysis() {
  if (symbolic_ != nullptr) umfpack_di_free_symbolic(&symbolic_);
}

bool SymbolicAnalysis::matches(const SparseMatrix& a) const {
  return a.isCompressed() && a.rows() == n_ && a.cols() == n_ &&
         std::equal(outer_.begin(), outer_.end(), a.outerIndexPtr()) &&
         static_cast<std::size_t>(a.nonZeros()) == inner_.size() &&
         std::equal(inner_.begin(), inner_.end(), a.innerIndexPtr());
}

SparseLu::SparseLu(SparseMatrix a, double min_rcond) : matrix_(std::move(a)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw SolverError("SparseLu: matrix is not square (" + std::to_string(matrix_.rows()) + "x" +
                      std::to_string(matrix_.cols()) + ")");
  }
  matrix_.makeCompressed();
  const int n = static_cast<int>(matrix_.rows());
  if (n == 0) return;

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  void* symbolic = nullptr;
  const int status = umfpack_di_symbolic(n, n, matrix_.outerIndexPtr(), matrix_.innerIndexPtr(),
                                         matrix_.valuePtr(), &symbolic, control, info);
  if (status != UMFPACK_OK) {
    umfpack_di_free_symbolic(&symbolic);
    throw SolverError("sparse LU symbolic analysis failed: " + status_text(status));
  }
  try {
    factorize(symbolic, min_rcond);
  } catch (...) {
    umfpack_di_free_symbolic(&symbolic);
    throw;
  }
  umfpack_di_free_symbolic(&symbolic);
}

SparseLu::SparseLu(SparseMatrix a, const SymbolicAnalysis& analysis, double min_rcond) : matrix_(std::move(a)) {
  matrix_.makeCompressed();
  if (!analysis.matches(matrix_)) throw SolverError("SparseLu: matrix pattern differs from the symbolic analysis");
  if (matrix_.rows() == 0) return;
  factorize(analysis.symbolic_, min_rcond);
}

void SparseLu::factorize(void* symbolic, double min_rcond) {
  const int n = static_cast<int>(matrix_.rows());
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  const int status = umfpack_di_numeric(matrix_.outerIndexPtr(), matrix_.innerIndexPtr(), matrix_.valuePtr(),
                                        symbolic, &numeric_, control, info);
  rcond_ = info[UMFPACK_RCOND];
  if (status != UMFPACK_OK) {
    umfpack_di_free_numeric(&numeric_);
    throw SolverError("sparse LU factorization of " + std::to_string(n) + "x" + std::to_string(n) +
                      " system failed: " + status_text(status) + " (rcond estimate " + std::to_string(rcond_) + ")");
  }
  if (!(rcond_ >= min_rcond)) {
    umfpack_di_free_numeric(&numeric_);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", rcond_);
    throw SolverError("sparse LU: " + std::to_string(n) + "x" + std::to_string(n) +
                      " system is numerically singular (rcond estimate " + buf + ")");
  }
}

SparseLu::~SparseLu() {
  if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
}

SparseLu::SparseLu(SparseLu&& other) noexcept
    : matrix_(std::move(other.matrix_)), numeric_(std::exchange(other.numeric_, nullptr)), rcond_(other.rcond_) {}

SparseLu& SparseLu::operator=(SparseLu&& other) noexcept {
  if (this != &other) {
    if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
    matrix_ = std::move(other.matrix_);
    numeric_ = std::exchange(other.numeric_, nullptr);
    rcond_ = other.rcond_;
  }
  return *this;
}

Eigen::VectorXd SparseLu::solve(const Eigen::VectorXd& b) const {
  const Eigen::Index n = matrix_.rows();
  if (b.size() != n) {
    throw SolverError("SparseLu::solve: rhs has " + std::to_string(b.size()) + " rows, expected " + std::to_string(n));
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (n == 0) return x;

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  control[UMFPACK_IRSTEP] = 1;
  const int status = umfpack_di_solve(UMFPACK_A, matrix_.outerIndexPtr(), matrix_.innerIndexPtr(),
                                      matrix_.valuePtr(), x.data(), b.data(), numeric_, control, info);
  if (status != UMFPACK_OK) throw SolverError("sparse LU solve failed: " + status_text(status));
  return x;
}

Eigen::MatrixXd SparseLu::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd x(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) x.col(j) = solve(Eigen::VectorXd(b.col(j)));
  return x;
}

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double r = (a * x - b).norm();
  const double nb = b.norm();
  return nb > 0.0 ? r / nb : r;
}

}  // namespace signms
