#pragma once

#include <array>
#include <vector>

namespace signms {

/// Inclusive rectangle of fine-grid nodes, [x0, x1] x [y0, y1].
struct NodeBox {
  int x0 = 0;
  int x1 = -1;
  int y0 = 0;
  int y1 = -1;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  int count() const { return width() > 0 && height() > 0 ? width() * height() : 0; }
  bool contains(int ix, int iy) const { return ix >= x0 && ix <= x1 && iy >= y0 && iy <= y1; }
  /// Row-major position of node (ix, iy) inside the box.
  int local(int ix, int iy) const { return (iy - y0) * width() + (ix - x0); }

  friend bool operator==(const NodeBox&, const NodeBox&) = default;
};

/// Intersection of two boxes (possibly empty).
NodeBox intersect(const NodeBox& a, const NodeBox& b);

/// Nested structured quadrilateral grids on the unit square.
///
/// Fine nodes are numbered row-major, node (ix, iy) -> iy * (n_fine + 1) + ix,
/// with x = ix * h and y = iy * h. Fine cells and coarse elements are
/// numbered row-major the same way.
class TwoScaleMesh {
public:
  TwoScaleMesh(int n_fine, int n_coarse);

  int n_fine() const { return n_fine_; }
  int n_coarse() const { return n_coarse_; }
  int cells_per_coarse() const { return cells_per_coarse_; }
  double h() const { return 1.0 / n_fine_; }
  double H() const { return 1.0 / n_coarse_; }

  int nodes_per_side() const { return n_fine_ + 1; }
  int num_nodes() const { return nodes_per_side() * nodes_per_side(); }
  int num_cells() const { return n_fine_ * n_fine_; }
  int num_elements() const { return n_coarse_ * n_coarse_; }

  int node(int ix, int iy) const { return iy * nodes_per_side() + ix; }
  int cell(int cx, int cy) const { return cy * n_fine_ + cx; }
  int element(int ex, int ey) const { return ey * n_coarse_ + ex; }

  std::array<double, 2> node_point(int node) const;
  std::array<double, 2> cell_center(int cell) const;

  /// Coarse element containing a fine cell.
  int element_of_cell(int cell) const;

  /// Global node indices of a fine cell, ordered (0,0), (1,0), (0,1), (1,1).
  std::array<int, 4> cell_nodes(int cell) const;

  /// Node box covering the closure of a coarse element.
  NodeBox element_box(int element) const;

  /// Node box covering the whole domain.
  NodeBox domain_box() const;

  bool is_dirichlet(int node) const { return dirichlet_mask_[node] != 0; }
  const std::vector<int>& dirichlet_dofs() const { return dirichlet_dofs_; }
  const std::vector<int>& free_dofs() const { return free_dofs_; }

private:
  int n_fine_;
  int n_coarse_;
  int cells_per_coarse_;
  std::vector<char> dirichlet_mask_;
  std::vector<int> dirichlet_dofs_;
  std::vector<int> free_dofs_;
};

/// Validates the pair and builds the mesh; throws ConfigError naming both
/// values when n_coarse does not divide n_fine.
TwoScaleMesh build_mesh(int n_fine, int n_coarse);

/// Oversampled domain K_i^m: the coarse elements within Chebyshev distance
/// m of element i, clipped to the domain. Always a rectangle of elements.
struct Patch {
  int center_element = 0;
  int layers = 0;
  int ex0 = 0, ex1 = 0, ey0 = 0, ey1 = 0;  ///< inclusive element index ranges
  std::vector<int> element_set;            ///< sorted ascending
  NodeBox box;                             ///< nodes of the closed patch
  std::vector<int> all_dofs;               ///< every node in box, ascending
  std::vector<int> interior_dofs;          ///< zero-trace dofs, ascending

  bool contains_element(int ex, int ey) const {
    return ex >= ex0 && ex <= ex1 && ey >= ey0 && ey <= ey1;
  }
  /// Box of nodes strictly inside the patch (may be empty).
  NodeBox interior_box() const { return {box.x0 + 1, box.x1 - 1, box.y0 + 1, box.y1 - 1}; }
};

Patch oversample_patch(const TwoScaleMesh& mesh, int element, int layers);

}  // namespace signms
