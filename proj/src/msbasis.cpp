#include "signms/msbasis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "signms/errors.hpp"
#include "signms/parallel.hpp"

namespace signms {

namespace {

struct PatchSystem {
  CorrectionOperator correction;
  SparseMatrix augmented;
  int interior = 0;
};

PatchSystem build_patch_system(const FineProblem& problem, const AuxiliarySpace& aux,
                               const Patch& patch, CorrectionWeight weight) {
  PatchSystem sys;
  sys.correction = correction_operator(aux, patch, weight);
  const CorrectionOperator& corr = sys.correction;
  const SparseMatrix b = restrict_matrix(problem.helmholtz, patch.interior_dofs);
  const int ni = static_cast<int>(b.rows());
  const int r = corr.rows();
  sys.interior = ni;

  SparseMatrix gram(r, r);
  {
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t e = 0; e < corr.blocks.size(); ++e) {
      const int off = static_cast<int>(e) * corr.l_star;
      for (int a = 0; a < corr.l_star; ++a) {
        for (int c = 0; c < corr.l_star; ++c) t.emplace_back(off + a, off + c, corr.blocks[e](a, c));
      }
    }
    gram.setFromTriplets(t.begin(), t.end());
  }
  const SparseMatrix pt_g = SparseMatrix(corr.projector.transpose()) * gram;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(b.nonZeros() + 2 * corr.projector.nonZeros() * corr.l_star + r));
  for (int col = 0; col < ni; ++col) {
    for (SparseMatrix::InnerIterator it(b, col); it; ++it) t.emplace_back(static_cast<int>(it.row()), col, it.value());
  }
  for (int col = 0; col < corr.projector.cols(); ++col) {
    for (SparseMatrix::InnerIterator it(corr.projector, col); it; ++it) {
      t.emplace_back(ni + static_cast<int>(it.row()), col, it.value());
    }
  }
  for (int col = 0; col < r; ++col) {
    for (SparseMatrix::InnerIterator it(pt_g, col); it; ++it) {
      t.emplace_back(static_cast<int>(it.row()), ni + col, it.value());
    }
    t.emplace_back(ni + col, ni + col, -1.0);
  }
  sys.augmented.resize(ni + r, ni + r);
  sys.augmented.setFromTriplets(t.begin(), t.end());
  return sys;
}

Eigen::VectorXd augmented_rhs(const PatchSystem& sys, const Eigen::VectorXd& top) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.augmented.rows());
  rhs.head(sys.interior) = top;
  return rhs;
}

Eigen::VectorXd box_values(const Patch& patch, const Eigen::VectorXd& interior_values) {
  const NodeBox& box = patch.box;
  const NodeBox inner = patch.interior_box();
  Eigen::VectorXd values = Eigen::VectorXd::Zero(box.count());
  int k = 0;
  for (int iy = inner.y0; iy <= inner.y1; ++iy) {
    for (int ix = inner.x0; ix <= inner.x1; ++ix) values[box.local(ix, iy)] = interior_values[k++];
  }
  return values;
}

std::string patch_label(const Patch& patch) {
  return "(i=" + std::to_string(patch.center_element) + ", m=" + std::to_string(patch.layers) + ")";
}

Eigen::VectorXd checked_solve(const SparseLu& lu, const PatchSystem& sys, const Eigen::VectorXd& rhs,
                              const std::string& label) {
  const Eigen::VectorXd x = lu.solve(rhs);
  const double res = relative_residual(sys.augmented, x, rhs);
  if (!(res <= 1e-8)) {
    throw SolverError("basis problem " + label + ": residual " + std::to_string(res) + " exceeds 1e-8");
  }
  return x;
}

}  // namespace

int CorrectionOperator::row(int element, int j) const {
  const auto it = std::lower_bound(elements.begin(), elements.end(), element);
  if (it == elements.end() || *it != element) return -1;
  return static_cast<int>(it - elements.begin()) * l_star + j;
}

Eigen::VectorXd CorrectionOperator::rhs(int element, int j) const {
  const int r = row(element, j);
  if (r < 0) throw IndexError("element " + std::to_string(element) + " is not in the patch");
  const int t = r / l_star;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(rows());
  g.segment(t * l_star, l_star) = blocks[t].col(j);
  return projector.transpose() * g;
}

double CorrectionOperator::quadratic_form(const Eigen::VectorXd& w) const {
  const Eigen::VectorXd y = projector * w;
  double sum = 0.0;
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    const auto seg = y.segment(static_cast<Eigen::Index>(t) * l_star, l_star);
    sum += seg.dot(blocks[t] * seg);
  }
  return sum;
}

CorrectionOperator correction_operator(const AuxiliarySpace& aux, const Patch& patch, CorrectionWeight weight) {
  CorrectionOperator op;
  op.l_star = aux.l_star;
  op.elements = patch.element_set;
  const NodeBox inner = patch.interior_box();
  const int ni = static_cast<int>(patch.interior_dofs.size());

  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t idx = 0; idx < op.elements.size(); ++idx) {
    const int e = op.elements[idx];
    if (e < 0 || e >= static_cast<int>(aux.per_element.size())) {
      throw Error("internal: patch element " + std::to_string(e) + " has no eigen data");
    }
    const ElementEigenData& data = aux.per_element[e];
    const NodeBox& eb = data.box;
    int k = 0;
    for (int iy = eb.y0; iy <= eb.y1; ++iy) {
      for (int ix = eb.x0; ix <= eb.x1; ++ix, ++k) {
        if (!inner.contains(ix, iy)) continue;
        const int col = inner.local(ix, iy);
        for (int a = 0; a < op.l_star; ++a) {
          t.emplace_back(static_cast<int>(idx) * op.l_star + a, col, data.weighted(a, k));
        }
      }
    }
    op.blocks.push_back(weight == CorrectionWeight::signed_mu ? data.signed_gram
                                                              : Eigen::MatrixXd(data.weighted * data.vectors));
  }
  op.projector.resize(static_cast<int>(op.elements.size()) * op.l_star, ni);
  op.projector.setFromTriplets(t.begin(), t.end());
  return op;
}

Eigen::VectorXd BasisColumn::to_fine(const TwoScaleMesh& mesh) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.num_nodes());
  int k = 0;
  for (int iy = box.y0; iy <= box.y1; ++iy) {
    for (int ix = box.x0; ix <= box.x1; ++ix) out[mesh.node(ix, iy)] = values[k++];
  }
  return out;
}

namespace {

// Symbolic analyses shared by patches of the same shape; the augmented
// pattern depends only on the patch extent in elements.
class SymbolicCache {
public:
  const SymbolicAnalysis& get(const Patch& patch, const SparseMatrix& a) {
    const std::pair<int, int> key{patch.ex1 - patch.ex0, patch.ey1 - patch.ey0};
    std::lock_guard lock(mutex_);
    auto& slot = entries_[key];
    if (!slot) slot = std::make_unique<SymbolicAnalysis>(a);
    return *slot;
  }

private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, std::unique_ptr<SymbolicAnalysis>> entries_;
};

std::vector<BasisColumn> solve_patch_columns(const FineProblem& problem, const AuxiliarySpace& aux,
                                             const Patch& patch, CorrectionWeight weight, SymbolicCache* cache) {
  PatchSystem sys = build_patch_system(problem, aux, patch, weight);
  sys.augmented.makeCompressed();
  const std::string label = patch_label(patch);
  std::unique_ptr<SparseLu> lu;
  try {
    const SymbolicAnalysis* analysis = cache ? &cache->get(patch, sys.augmented) : nullptr;
    if (analysis && analysis->matches(sys.augmented)) {
      lu = std::make_unique<SparseLu>(sys.augmented, *analysis);
    } else {
      lu = std::make_unique<SparseLu>(sys.augmented);
    }
  } catch (const SolverError& e) {
    throw SolverError("basis problem " + label + ": " + e.what());
  }

  std::vector<BasisColumn> out;
  for (int j = 0; j < aux.l_star; ++j) {
    const Eigen::VectorXd rhs = augmented_rhs(sys, sys.correction.rhs(patch.center_element, j));
    const Eigen::VectorXd x = checked_solve(*lu, sys, rhs, label);
    BasisColumn col;
    col.element = patch.center_element;
    col.j = j;
    col.box = patch.box;
    col.values = box_values(patch, x.head(sys.interior));
    out.push_back(std::move(col));
  }
  return out;
}

}  // namespace

std::vector<BasisColumn> solve_patch_basis(const TwoScaleMesh& mesh, const FineProblem& problem,
                                           const AuxiliarySpace& aux, const Patch& patch, CorrectionWeight weight) {
  if (problem.load.size() != mesh.num_nodes()) throw Error("internal: fine problem does not match the mesh");
  return solve_patch_columns(problem, aux, patch, weight, nullptr);
}

MultiscaleBasis build_multiscale_basis(const TwoScaleMesh& mesh, const FineProblem& problem,
                                       const AuxiliarySpace& aux, int layers, CorrectionWeight weight, int threads) {
  MultiscaleBasis basis;
  basis.l_star = aux.l_star;
  basis.layers = layers;
  const int n = mesh.num_elements();
  basis.columns.resize(static_cast<std::size_t>(n) * aux.l_star);
  basis.patches.resize(static_cast<std::size_t>(n));

  if (problem.load.size() != mesh.num_nodes()) throw Error("internal: fine problem does not match the mesh");
  std::vector<PatchFailure> failures;
  std::mutex failure_mutex;
  SymbolicCache cache;
  parallel_for(n, worker_count(threads), [&](int e) {
    Patch patch = oversample_patch(mesh, e, layers);
    try {
      auto cols = solve_patch_columns(problem, aux, patch, weight, &cache);
      for (auto& c : cols) basis.columns[static_cast<std::size_t>(e) * aux.l_star + c.j] = std::move(c);
    } catch (const Error& err) {
      std::lock_guard lock(failure_mutex);
      failures.push_back({e, layers, err.what()});
    }
    basis.patches[e] = std::move(patch);
  });

  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) { return a.element < b.element; });
    std::string msg = std::to_string(failures.size()) + " patch problem(s) failed:";
    for (const auto& f : failures) msg += "\n  " + f.message;
    throw SolverError(msg);
  }
  return basis;
}

Eigen::VectorXd compute_local_basis(const TwoScaleMesh& mesh, const FineProblem& problem, const AuxiliarySpace& aux,
                                    int element, int j, int layers, CorrectionWeight weight) {
  if (j < 0 || j >= aux.l_star) throw IndexError("basis index j=" + std::to_string(j) + " out of range");
  const Patch patch = oversample_patch(mesh, element, layers);
  const auto cols = solve_patch_basis(mesh, problem, aux, patch, weight);
  return cols[static_cast<std::size_t>(j)].to_fine(mesh);
}

struct GlobalBasisSolver::Impl {
  const TwoScaleMesh* mesh = nullptr;
  Patch patch;
  PatchSystem sys;
  std::unique_ptr<SparseLu> lu;
};

GlobalBasisSolver::GlobalBasisSolver(const TwoScaleMesh& mesh, const FineProblem& problem, const AuxiliarySpace& aux,
                                     CorrectionWeight weight)
    : impl_(std::make_unique<Impl>()) {
  impl_->mesh = &mesh;
  impl_->patch = oversample_patch(mesh, 0, mesh.n_coarse());
  impl_->sys = build_patch_system(problem, aux, impl_->patch, weight);
  try {
    impl_->lu = std::make_unique<SparseLu>(impl_->sys.augmented);
  } catch (const SolverError& e) {
    throw SolverError(std::string("global basis system: ") + e.what());
  }
}

GlobalBasisSolver::~GlobalBasisSolver() = default;

Eigen::VectorXd GlobalBasisSolver::solve(int element, int j) const {
  const Eigen::VectorXd rhs = augmented_rhs(impl_->sys, impl_->sys.correction.rhs(element, j));
  const Eigen::VectorXd x = checked_solve(*impl_->lu, impl_->sys, rhs, "(global i=" + std::to_string(element) + ")");
  return extend_vector(x.head(impl_->sys.interior), impl_->patch.interior_dofs, impl_->mesh->num_nodes());
}

Eigen::VectorXd GlobalBasisSolver::solve_target(const Eigen::VectorXd& target) const {
  const CorrectionOperator& corr = impl_->sys.correction;
  Eigen::VectorXd g(corr.rows());
  for (std::size_t t = 0; t < corr.blocks.size(); ++t) {
    const auto off = static_cast<Eigen::Index>(t) * corr.l_star;
    g.segment(off, corr.l_star) = corr.blocks[t] * target.segment(off, corr.l_star);
  }
  const Eigen::VectorXd rhs = augmented_rhs(impl_->sys, corr.projector.transpose() * g);
  const Eigen::VectorXd x = checked_solve(*impl_->lu, impl_->sys, rhs, "(global target)");
  return extend_vector(x.head(impl_->sys.interior), impl_->patch.interior_dofs, impl_->mesh->num_nodes());
}

Eigen::VectorXd compute_global_basis(const TwoScaleMesh& mesh, const FineProblem& problem, const AuxiliarySpace& aux,
                                     int element, int j, CorrectionWeight weight) {
  return GlobalBasisSolver(mesh, problem, aux, weight).solve(element, j);
}

double energy_outside(const TwoScaleMesh& mesh, const FineProblem& problem, const Eigen::VectorXd& v,
                      const NodeBox& box) {
  const Q1Element& ref = q1_element();
  double sum = 0.0;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const int cx = cell % mesh.n_fine();
    const int cy = cell / mesh.n_fine();
    if (cx >= box.x0 && cx < box.x1 && cy >= box.y0 && cy < box.y1) continue;
    const auto nodes = mesh.cell_nodes(cell);
    const Eigen::Vector4d x{v[nodes[0]], v[nodes[1]], v[nodes[2]], v[nodes[3]]};
    sum += std::abs(problem.sigma[cell]) * x.dot(ref.stiffness * x);
  }
  return std::sqrt(std::max(sum, 0.0));
}

std::optional<double> fit_geometric_rate(const std::vector<int>& index, const std::vector<double>& values) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0 && std::isfinite(values[i])) {
      xs.push_back(index[i]);
      ys.push_back(std::log(values[i]));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return std::exp((n * sxy - sx * sy) / denom);
}

DecayProfile decay_profile(const TwoScaleMesh& mesh, const FineProblem& problem, const AuxiliarySpace& aux,
                           const GlobalBasisSolver& global, int element, int j, int m_max, CorrectionWeight weight) {
  DecayProfile profile;
  profile.element = element;
  profile.j = j;
  const Eigen::VectorXd glo = global.solve(element, j);
  profile.global_energy = std::sqrt(glo.dot(problem.stiffness_abs * glo));

  std::vector<int> ms;
  std::vector<double> tails;
  std::vector<double> diffs;
  for (int m = 1; m <= m_max; ++m) {
    const Eigen::VectorXd loc = compute_local_basis(mesh, problem, aux, element, j, m, weight);
    const Eigen::VectorXd d = glo - loc;
    DecayStep step;
    step.layers = m;
    step.difference_energy = std::sqrt(std::max(0.0, d.dot(problem.stiffness_abs * d)));
    step.tail_energy = energy_outside(mesh, problem, glo, oversample_patch(mesh, element, m).box);
    profile.steps.push_back(step);
    ms.push_back(m);
    tails.push_back(step.tail_energy);
    diffs.push_back(step.difference_energy);
  }
  profile.theta = fit_geometric_rate(ms, tails);
  profile.theta_difference = fit_geometric_rate(ms, diffs);
  return profile;
}

}  // namespace signms
