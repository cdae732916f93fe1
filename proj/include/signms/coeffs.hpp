#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "signms/mesh.hpp"

namespace signms {

/// Cellwise-constant coefficients sigma and c on the n x n fine grid.
///
/// Both arrays are indexed by fine cell (row-major). Cells with positive
/// values form Omega+, negative ones Omega-.
struct CoefficientField {
  int n_fine = 0;
  std::vector<double> sigma;
  std::vector<double> c;

  int num_cells() const { return n_fine * n_fine; }
  bool is_negative(int cell) const { return sigma[static_cast<std::size_t>(cell)] < 0.0; }
};

/// Throws ConfigError if sizes disagree, any value is zero or non-finite, or
/// sign(sigma) != sign(c) in some cell.
void validate(const CoefficientField& field);

/// Nodal source values f on the (n+1) x (n+1) fine nodes.
struct SourceField {
  int n_fine = 0;
  std::vector<double> f;
};

struct FlatInterfaceParams {
  double sigma_plus = 1.0;       ///< value on y > gamma
  double sigma_minus_mag = 3.0;  ///< magnitude of the negative value on y < gamma
  double gamma = 0.5;            ///< interface height
  double k = 4.0;                ///< wavenumber used by the manufactured source
};

CoefficientField flat_interface(const TwoScaleMesh& mesh, const FlatInterfaceParams& params);

struct ExactValue {
  double u = 0.0;
  double f = 0.0;
};

/// Manufactured piecewise-polynomial solution for the flat interface and the
/// source that makes it exact for -div(sigma grad u) - k^2 c u = f with
/// sigma = c.
ExactValue flat_interface_exact(std::array<double, 2> point, const FlatInterfaceParams& params);

/// Nodal interpolant of the flat-interface exact solution and its source.
std::vector<double> flat_interface_exact_nodal(const TwoScaleMesh& mesh, const FlatInterfaceParams& params);
SourceField flat_interface_source(const TwoScaleMesh& mesh, const FlatInterfaceParams& params);

struct InclusionParams {
  std::uint64_t seed = 1;
  double sigma_plus = 1.0;
  double sigma_minus_mag = 1.0e3;
  int count = 40;
  int min_size = 4;   ///< side length in fine cells
  int max_size = 12;  ///< side length in fine cells
  int max_attempts = 10000;
};

/// Axis-aligned rectangular inclusions (sigma = c = -sigma_minus_mag) in a
/// positive background. Inclusions keep one cell of clearance from the
/// domain boundary and do not overlap or touch each other.
CoefficientField random_inclusions(const TwoScaleMesh& mesh, const InclusionParams& params);

/// Vertical negative-index slab: -10 for 11/24 <= x <= 13/24, +1 elsewhere,
/// decided by the cell center.
CoefficientField nim_slab(const TwoScaleMesh& mesh);

CoefficientField uniform_field(const TwoScaleMesh& mesh, double sigma, double c);

/// exp(-r^2 / (2 spread^2)), optionally multiplied by 1 / (spread sqrt(2 pi)).
SourceField gaussian_source(const TwoScaleMesh& mesh, std::array<double, 2> center, double spread, bool normalized);

SourceField zero_source(const TwoScaleMesh& mesh);

/// sigma+_min / sigma-_max, or +infinity when Omega- is empty. Throws
/// DomainError when Omega+ is empty.
double contrast_ratio(const CoefficientField& field);

/// Cell grid files. `c_path` defaults to the sigma file (c = sigma).
CoefficientField load_field(const std::string& sigma_path, const std::optional<std::string>& c_path = std::nullopt);
void save_field(const CoefficientField& field, const std::string& sigma_path, const std::string& c_path);

SourceField load_source(const std::string& path);
void save_node_values(const std::string& path, int n_fine, const std::vector<double>& values);

}  // namespace signms
