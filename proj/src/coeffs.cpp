#include "signms/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "signms/errors.hpp"
#include "signms/grid_io.hpp"

namespace signms {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string(name) + " must be positive and finite, got " + std::to_string(value));
  }
}

// Uniform integer in [lo, hi] from the raw engine output; avoids the
// implementation-defined std::uniform_int_distribution so layouts are
// identical across standard libraries.
int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return lo + static_cast<int>(draw % span);
}

CoefficientField filled(const TwoScaleMesh& mesh, double value) {
  CoefficientField field;
  field.n_fine = mesh.n_fine();
  field.sigma.assign(static_cast<std::size_t>(mesh.num_cells()), value);
  field.c = field.sigma;
  return field;
}

}  // namespace

void validate(const CoefficientField& field) {
  const auto n = static_cast<std::size_t>(field.num_cells());
  if (field.sigma.size() != n || field.c.size() != n) {
    throw ConfigError("coefficient field size mismatch: expected " + std::to_string(n) + " cells, got sigma=" +
                      std::to_string(field.sigma.size()) + " c=" + std::to_string(field.c.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double s = field.sigma[i];
    const double c = field.c[i];
    if (s == 0.0 || c == 0.0 || !std::isfinite(s) || !std::isfinite(c)) {
      throw ConfigError("coefficient field cell " + std::to_string(i) + " is zero or non-finite");
    }
    if ((s > 0.0) != (c > 0.0)) {
      throw ConfigError("coefficient field cell " + std::to_string(i) + " has sign(sigma) != sign(c)");
    }
  }
}

CoefficientField flat_interface(const TwoScaleMesh& mesh, const FlatInterfaceParams& params) {
  require_positive(params.sigma_plus, "sigma_plus");
  require_positive(params.sigma_minus_mag, "sigma_minus");
  if (!(params.gamma > 0.0 && params.gamma < 1.0)) {
    throw ConfigError("interface height gamma must lie in (0,1), got " + std::to_string(params.gamma));
  }
  CoefficientField field = filled(mesh, params.sigma_plus);
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    if (mesh.cell_center(cell)[1] <= params.gamma) {
      field.sigma[cell] = -params.sigma_minus_mag;
      field.c[cell] = -params.sigma_minus_mag;
    }
  }
  return field;
}

ExactValue flat_interface_exact(std::array<double, 2> point, const FlatInterfaceParams& params) {
  const auto [x, y] = point;
  const double g = params.gamma;
  const double bubble = x * (x - 1.0) * y * (y - 1.0) * (y - g);
  const double laplacian = 2.0 * y * (y - 1.0) * (y - g) + x * (x - 1.0) * (6.0 * y - 2.0 * (g + 1.0));

  ExactValue out;
  out.u = y > g ? -params.sigma_minus_mag * bubble : params.sigma_plus * bubble;
  // sigma * u = -sigma_plus * sigma_minus * bubble on both sides, so
  // -div(sigma grad u) - k^2 sigma u = sigma_plus * sigma_minus * (lap + k^2) bubble.
  out.f = params.sigma_plus * params.sigma_minus_mag * (laplacian + params.k * params.k * bubble);
  return out;
}

std::vector<double> flat_interface_exact_nodal(const TwoScaleMesh& mesh, const FlatInterfaceParams& params) {
  std::vector<double> u(static_cast<std::size_t>(mesh.num_nodes()));
  for (int n = 0; n < mesh.num_nodes(); ++n) u[n] = flat_interface_exact(mesh.node_point(n), params).u;
  return u;
}

SourceField flat_interface_source(const TwoScaleMesh& mesh, const FlatInterfaceParams& params) {
  SourceField src{mesh.n_fine(), std::vector<double>(static_cast<std::size_t>(mesh.num_nodes()))};
  for (int n = 0; n < mesh.num_nodes(); ++n) src.f[n] = flat_interface_exact(mesh.node_point(n), params).f;
  return src;
}

CoefficientField random_inclusions(const TwoScaleMesh& mesh, const InclusionParams& params) {
  require_positive(params.sigma_plus, "inclusion sigma_plus");
  require_positive(params.sigma_minus_mag, "inclusion sigma_minus");
  if (params.count < 0) throw ConfigError("inclusion count must be >= 0");
  if (params.min_size < 1 || params.max_size < params.min_size) {
    throw ConfigError("inclusion size range must satisfy 1 <= min <= max, got [" + std::to_string(params.min_size) +
                      ", " + std::to_string(params.max_size) + "]");
  }

  const int n = mesh.n_fine();
  CoefficientField field = filled(mesh, params.sigma_plus);
  // occupied[] marks inclusion cells plus a one-cell halo so inclusions
  // never touch each other.
  std::vector<char> occupied(static_cast<std::size_t>(mesh.num_cells()), 0);
  std::mt19937_64 rng(params.seed);

  for (int placed = 0; placed < params.count; ++placed) {
    bool ok = false;
    for (int attempt = 0; attempt < params.max_attempts && !ok; ++attempt) {
      const int w = uniform_int(rng, params.min_size, params.max_size);
      const int hgt = uniform_int(rng, params.min_size, params.max_size);
      // One cell of clearance from the boundary on every side.
      if (w > n - 2 || hgt > n - 2) continue;
      const int x0 = uniform_int(rng, 1, n - 1 - w);
      const int y0 = uniform_int(rng, 1, n - 1 - hgt);

      bool free = true;
      for (int cy = y0; cy < y0 + hgt && free; ++cy) {
        for (int cx = x0; cx < x0 + w; ++cx) {
          if (occupied[mesh.cell(cx, cy)]) {
            free = false;
            break;
          }
        }
      }
      if (!free) continue;

      for (int cy = y0; cy < y0 + hgt; ++cy) {
        for (int cx = x0; cx < x0 + w; ++cx) {
          field.sigma[mesh.cell(cx, cy)] = -params.sigma_minus_mag;
          field.c[mesh.cell(cx, cy)] = -params.sigma_minus_mag;
        }
      }
      for (int cy = std::max(0, y0 - 1); cy < std::min(n, y0 + hgt + 1); ++cy) {
        for (int cx = std::max(0, x0 - 1); cx < std::min(n, x0 + w + 1); ++cx) occupied[mesh.cell(cx, cy)] = 1;
      }
      ok = true;
    }
    if (!ok) {
      throw ConfigError("random inclusions: could not place inclusion " + std::to_string(placed + 1) + " of " +
                        std::to_string(params.count) + " after " + std::to_string(params.max_attempts) +
                        " attempts without touching the boundary or another inclusion");
    }
  }
  return field;
}

CoefficientField nim_slab(const TwoScaleMesh& mesh) {
  CoefficientField field = filled(mesh, 1.0);
  constexpr double left = 11.0 / 24.0;
  constexpr double right = 13.0 / 24.0;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const double x = mesh.cell_center(cell)[0];
    if (x >= left && x <= right) {
      field.sigma[cell] = -10.0;
      field.c[cell] = -10.0;
    }
  }
  return field;
}

CoefficientField uniform_field(const TwoScaleMesh& mesh, double sigma, double c) {
  CoefficientField field;
  field.n_fine = mesh.n_fine();
  field.sigma.assign(static_cast<std::size_t>(mesh.num_cells()), sigma);
  field.c.assign(static_cast<std::size_t>(mesh.num_cells()), c);
  validate(field);
  return field;
}

SourceField gaussian_source(const TwoScaleMesh& mesh, std::array<double, 2> center, double spread, bool normalized) {
  require_positive(spread, "gaussian spread");
  const double prefactor = normalized ? 1.0 / (spread * std::sqrt(2.0 * std::numbers::pi)) : 1.0;
  SourceField src{mesh.n_fine(), std::vector<double>(static_cast<std::size_t>(mesh.num_nodes()))};
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const auto p = mesh.node_point(n);
    const double dx = p[0] - center[0];
    const double dy = p[1] - center[1];
    src.f[n] = prefactor * std::exp(-(dx * dx + dy * dy) / (2.0 * spread * spread));
  }
  return src;
}

SourceField zero_source(const TwoScaleMesh& mesh) {
  return {mesh.n_fine(), std::vector<double>(static_cast<std::size_t>(mesh.num_nodes()), 0.0)};
}

double contrast_ratio(const CoefficientField& field) {
  double pos_min = std::numeric_limits<double>::infinity();
  double neg_max = 0.0;
  bool any_pos = false;
  bool any_neg = false;
  for (double s : field.sigma) {
    if (s > 0.0) {
      any_pos = true;
      pos_min = std::min(pos_min, s);
    } else if (s < 0.0) {
      any_neg = true;
      neg_max = std::max(neg_max, -s);
    }
  }
  if (!any_pos) throw DomainError("contrast ratio undefined: field has no positive cells");
  if (!any_neg) return std::numeric_limits<double>::infinity();
  return pos_min / neg_max;
}

CoefficientField load_field(const std::string& sigma_path, const std::optional<std::string>& c_path) {
  const Grid sg = read_grid(sigma_path);
  if (sg.rows != sg.cols) {
    throw IngestError(sigma_path, 1, "cell grid must be square, got " + std::to_string(sg.rows) + "x" +
                                         std::to_string(sg.cols));
  }
  CoefficientField field;
  field.n_fine = sg.rows;
  field.sigma = sg.values;
  if (c_path) {
    const Grid cg = read_grid(*c_path);
    if (cg.rows != sg.rows || cg.cols != sg.cols) {
      throw IngestError(*c_path, 1, "c grid shape differs from sigma grid");
    }
    field.c = cg.values;
  } else {
    field.c = field.sigma;
  }
  for (std::size_t i = 0; i < field.sigma.size(); ++i) {
    if (field.sigma[i] == 0.0 || field.c[i] == 0.0) {
      // +2: one header line, rows are 1-based.
      const int line = static_cast<int>(i) / field.n_fine + 2;
      throw IngestError(field.sigma[i] == 0.0 ? sigma_path : *c_path, line, "zero coefficient entry");
    }
  }
  validate(field);
  return field;
}

void save_field(const CoefficientField& field, const std::string& sigma_path, const std::string& c_path) {
  write_grid(sigma_path, field.n_fine, field.n_fine, field.sigma);
  write_grid(c_path, field.n_fine, field.n_fine, field.c);
}

SourceField load_source(const std::string& path) {
  const Grid g = read_grid(path);
  if (g.rows != g.cols || g.rows < 2) {
    throw IngestError(path, 1, "node grid must be square with at least 2 rows");
  }
  for (double v : g.values) {
    if (!std::isfinite(v)) throw IngestError(path, 1, "non-finite source value");
  }
  return {g.rows - 1, g.values};
}

void save_node_values(const std::string& path, int n_fine, const std::vector<double>& values) {
  write_grid(path, n_fine + 1, n_fine + 1, values);
}

}  // namespace signms
