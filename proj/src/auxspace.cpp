#include "signms/auxspace.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "signms/assembly.hpp"
#include "signms/errors.hpp"

namespace signms {

namespace {

double mu_scale(const TwoScaleMesh& mesh, double mu_msh) { return mu_msh / (mesh.H() * mesh.H()); }

// Elementwise |mu|-weighted mass applied matrix-free to a vector over the
// element's node box.
Eigen::VectorXd element_mass_apply(const TwoScaleMesh& mesh, std::span<const double> mu, int element,
                                   const Eigen::VectorXd& v) {
  const Q1Element& ref = q1_element();
  const double area = mesh.h() * mesh.h();
  const NodeBox box = mesh.element_box(element);
  const int w = box.width();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int cy = box.y0; cy < box.y1; ++cy) {
    for (int cx = box.x0; cx < box.x1; ++cx) {
      const int base = (cy - box.y0) * w + (cx - box.x0);
      const int idx[4] = {base, base + 1, base + w, base + w + 1};
      const Eigen::Vector4d x{v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]]};
      const Eigen::Vector4d y = (std::abs(mu[mesh.cell(cx, cy)]) * area) * (ref.mass * x);
      for (int a = 0; a < 4; ++a) out[idx[a]] += y[a];
    }
  }
  return out;
}

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    const double scale = vectors.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double x = vectors(r, j);
      if (std::abs(x) > 1e-8 * scale) {
        if (x < 0.0) vectors.col(j) *= -1.0;
        break;
      }
    }
  }
}

std::vector<double> element_key(const TwoScaleMesh& mesh, const CoefficientField& field, int element) {
  const NodeBox box = mesh.element_box(element);
  std::vector<double> key;
  key.reserve(2 * static_cast<std::size_t>(mesh.cells_per_coarse() * mesh.cells_per_coarse()));
  for (int cy = box.y0; cy < box.y1; ++cy) {
    for (int cx = box.x0; cx < box.x1; ++cx) {
      key.push_back(field.sigma[mesh.cell(cx, cy)]);
      key.push_back(field.c[mesh.cell(cx, cy)]);
    }
  }
  return key;
}

}  // namespace

ElementMatrices element_matrices(const TwoScaleMesh& mesh, const CoefficientField& field, int element,
                                 double mu_msh) {
  if (element < 0 || element >= mesh.num_elements()) {
    throw IndexError("coarse element " + std::to_string(element) + " out of range");
  }
  const Q1Element& ref = q1_element();
  const double mass_scale = mu_scale(mesh, mu_msh) * mesh.h() * mesh.h();

  ElementMatrices m;
  m.box = mesh.element_box(element);
  const int w = m.box.width();
  const int n = m.box.count();
  m.stiffness_abs = Eigen::MatrixXd::Zero(n, n);
  m.mass_abs = Eigen::MatrixXd::Zero(n, n);
  m.mass_signed = Eigen::MatrixXd::Zero(n, n);
  for (int cy = m.box.y0; cy < m.box.y1; ++cy) {
    for (int cx = m.box.x0; cx < m.box.x1; ++cx) {
      const int cell = mesh.cell(cx, cy);
      const int base = (cy - m.box.y0) * w + (cx - m.box.x0);
      const int idx[4] = {base, base + 1, base + w, base + w + 1};
      const double s = std::abs(field.sigma[cell]);
      const double c = field.c[cell] * mass_scale;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          m.stiffness_abs(idx[a], idx[b]) += s * ref.stiffness(a, b);
          m.mass_abs(idx[a], idx[b]) += std::abs(c) * ref.mass(a, b);
          m.mass_signed(idx[a], idx[b]) += c * ref.mass(a, b);
        }
      }
    }
  }
  return m;
}

std::vector<int> ElementEigenData::local_dof_map(const TwoScaleMesh& mesh) const {
  std::vector<int> map;
  map.reserve(static_cast<std::size_t>(box.count()));
  for (int iy = box.y0; iy <= box.y1; ++iy) {
    for (int ix = box.x0; ix <= box.x1; ++ix) map.push_back(mesh.node(ix, iy));
  }
  return map;
}

ElementEigenData solve_element_eigens(const TwoScaleMesh& mesh, const CoefficientField& field, int element,
                                      int l_star, double mu_msh) {
  if (l_star < 1) throw ConfigError("l_star must be >= 1, got " + std::to_string(l_star));
  const ElementMatrices local = element_matrices(mesh, field, element, mu_msh);
  const int n = local.box.count();
  if (l_star + 1 > n) {
    throw ConfigError("l_star + 1 = " + std::to_string(l_star + 1) + " exceeds the " + std::to_string(n) +
                      " local dofs of a coarse element");
  }

  // dsygvx overwrites its inputs.
  Eigen::MatrixXd a = local.stiffness_abs;
  Eigen::MatrixXd b = local.mass_abs;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, l_star + 1);
  std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
  lapack_int found = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_dsygvx(LAPACK_COL_MAJOR, 1, 'V', 'I', 'U', n, a.data(), n, b.data(), n, 0.0, 0.0, 1,
                                         l_star + 1, abstol, &found, w.data(), z.data(), n, ifail.data());
  if (info != 0 || found != l_star + 1) {
    throw NumericalError("generalized eigensolve failed on coarse element " + std::to_string(element) +
                         " (LAPACK info " + std::to_string(info) + ", " + std::to_string(found) + " of " +
                         std::to_string(l_star + 1) + " eigenpairs)");
  }

  ElementEigenData data;
  data.element = element;
  data.box = local.box;
  data.eigenvalues.assign(w.data(), w.data() + l_star + 1);
  data.vectors = z.leftCols(l_star);
  fix_signs(data.vectors);
  data.weighted = data.vectors.transpose() * local.mass_abs;
  data.signed_gram = data.vectors.transpose() * local.mass_signed * data.vectors;
  return data;
}

AuxiliarySpace build_auxiliary_space(const TwoScaleMesh& mesh, const CoefficientField& field, int l_star,
                                     double mu_msh) {
  if (!(mu_msh > 0.0)) throw ConfigError("mu_msh must be positive");
  AuxiliarySpace aux;
  aux.l_star = l_star;
  aux.mu_msh = mu_msh;
  aux.per_element.resize(static_cast<std::size_t>(mesh.num_elements()));

  const double scale = mu_scale(mesh, mu_msh);
  aux.mu.resize(field.c.size());
  for (std::size_t i = 0; i < field.c.size(); ++i) aux.mu[i] = scale * field.c[i];

  // Local problems depend only on the element's own coefficients, so
  // identical coefficient blocks share one eigensolve.
  std::map<std::vector<double>, int> solved;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    auto key = element_key(mesh, field, e);
    auto it = solved.find(key);
    if (it == solved.end()) {
      aux.per_element[e] = solve_element_eigens(mesh, field, e, l_star, mu_msh);
      solved.emplace(std::move(key), e);
    } else {
      ElementEigenData copy = aux.per_element[it->second];
      copy.element = e;
      copy.box = mesh.element_box(e);
      aux.per_element[e] = std::move(copy);
    }
  }

  aux.lambda_gap = std::numeric_limits<double>::infinity();
  for (const auto& d : aux.per_element) aux.lambda_gap = std::min(aux.lambda_gap, d.eigenvalues.back());
  if (!(aux.lambda_gap > 0.0)) {
    throw NumericalError("spectral gap is not positive (" + std::to_string(aux.lambda_gap) + ")");
  }
  return aux;
}

BrokenField break_field(const TwoScaleMesh& mesh, const Eigen::VectorXd& v) {
  BrokenField out;
  out.parts.resize(static_cast<std::size_t>(mesh.num_elements()));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const NodeBox box = mesh.element_box(e);
    Eigen::VectorXd part(box.count());
    int k = 0;
    for (int iy = box.y0; iy <= box.y1; ++iy) {
      for (int ix = box.x0; ix <= box.x1; ++ix) part[k++] = v[mesh.node(ix, iy)];
    }
    out.parts[e] = std::move(part);
  }
  return out;
}

Eigen::VectorXd aux_coefficients(const AuxiliarySpace& aux, const BrokenField& v) {
  Eigen::VectorXd coeffs(aux.dimension());
  for (std::size_t e = 0; e < aux.per_element.size(); ++e) {
    coeffs.segment(static_cast<Eigen::Index>(e) * aux.l_star, aux.l_star) = aux.per_element[e].weighted * v.parts[e];
  }
  return coeffs;
}

Eigen::VectorXd aux_coefficients(const TwoScaleMesh& mesh, const AuxiliarySpace& aux, const Eigen::VectorXd& v) {
  return aux_coefficients(aux, break_field(mesh, v));
}

BrokenField aux_function(const AuxiliarySpace& aux, const Eigen::VectorXd& coeffs) {
  BrokenField out;
  out.parts.resize(aux.per_element.size());
  for (std::size_t e = 0; e < aux.per_element.size(); ++e) {
    out.parts[e] = aux.per_element[e].vectors * coeffs.segment(static_cast<Eigen::Index>(e) * aux.l_star, aux.l_star);
  }
  return out;
}

BrokenField apply_pi(const AuxiliarySpace& aux, const BrokenField& v) {
  return aux_function(aux, aux_coefficients(aux, v));
}

BrokenField apply_pi(const TwoScaleMesh& mesh, const AuxiliarySpace& aux, const Eigen::VectorXd& v) {
  return apply_pi(aux, break_field(mesh, v));
}

double s_tilde_inner(const TwoScaleMesh& mesh, const AuxiliarySpace& aux, const BrokenField& a,
                     const BrokenField& b) {
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) sum += a.parts[e].dot(element_mass_apply(mesh, aux.mu, e, b.parts[e]));
  return sum;
}

BrokenField subtract(const BrokenField& a, const BrokenField& b) {
  BrokenField out;
  out.parts.resize(a.parts.size());
  for (std::size_t e = 0; e < a.parts.size(); ++e) out.parts[e] = a.parts[e] - b.parts[e];
  return out;
}

}  // namespace signms
