#include "signms/mesh.hpp"

#include <algorithm>
#include <string>

#include "signms/errors.hpp"

namespace signms {

NodeBox intersect(const NodeBox& a, const NodeBox& b) {
  return {std::max(a.x0, b.x0), std::min(a.x1, b.x1), std::max(a.y0, b.y0), std::min(a.y1, b.y1)};
}

TwoScaleMesh::TwoScaleMesh(int n_fine, int n_coarse) : n_fine_(n_fine), n_coarse_(n_coarse) {
  if (n_coarse < 1 || n_fine < n_coarse || n_fine % n_coarse != 0) {
    throw ConfigError("invalid two-scale mesh: n_fine=" + std::to_string(n_fine) +
                      " must be a positive multiple of n_coarse=" + std::to_string(n_coarse));
  }
  cells_per_coarse_ = n_fine / n_coarse;

  const int side = nodes_per_side();
  dirichlet_mask_.assign(static_cast<std::size_t>(num_nodes()), 0);
  for (int iy = 0; iy < side; ++iy) {
    for (int ix = 0; ix < side; ++ix) {
      const bool boundary = ix == 0 || iy == 0 || ix == n_fine || iy == n_fine;
      const int id = node(ix, iy);
      if (boundary) {
        dirichlet_mask_[id] = 1;
        dirichlet_dofs_.push_back(id);
      } else {
        free_dofs_.push_back(id);
      }
    }
  }
}

std::array<double, 2> TwoScaleMesh::node_point(int id) const {
  const int side = nodes_per_side();
  return {(id % side) * h(), (id / side) * h()};
}

std::array<double, 2> TwoScaleMesh::cell_center(int id) const {
  return {((id % n_fine_) + 0.5) * h(), ((id / n_fine_) + 0.5) * h()};
}

int TwoScaleMesh::element_of_cell(int id) const {
  const int cx = id % n_fine_;
  const int cy = id / n_fine_;
  return element(cx / cells_per_coarse_, cy / cells_per_coarse_);
}

std::array<int, 4> TwoScaleMesh::cell_nodes(int id) const {
  const int cx = id % n_fine_;
  const int cy = id / n_fine_;
  return {node(cx, cy), node(cx + 1, cy), node(cx, cy + 1), node(cx + 1, cy + 1)};
}

NodeBox TwoScaleMesh::element_box(int id) const {
  const int ex = id % n_coarse_;
  const int ey = id / n_coarse_;
  const int p = cells_per_coarse_;
  return {ex * p, (ex + 1) * p, ey * p, (ey + 1) * p};
}

NodeBox TwoScaleMesh::domain_box() const { return {0, n_fine_, 0, n_fine_}; }

TwoScaleMesh build_mesh(int n_fine, int n_coarse) { return TwoScaleMesh(n_fine, n_coarse); }

Patch oversample_patch(const TwoScaleMesh& mesh, int element, int layers) {
  if (element < 0 || element >= mesh.num_elements()) {
    throw IndexError("coarse element " + std::to_string(element) + " out of range [0, " +
                     std::to_string(mesh.num_elements()) + ")");
  }
  if (layers < 0) {
    throw ConfigError("oversampling layers must be >= 0, got " + std::to_string(layers));
  }
  const int nc = mesh.n_coarse();
  const int ex = element % nc;
  const int ey = element / nc;

  Patch patch;
  patch.center_element = element;
  patch.layers = layers;
  // Chebyshev-distance growth, clipped to the domain; clamp before adding so
  // very large layer counts cannot overflow.
  const int reach = std::min(layers, nc);
  patch.ex0 = std::max(0, ex - reach);
  patch.ex1 = std::min(nc - 1, ex + reach);
  patch.ey0 = std::max(0, ey - reach);
  patch.ey1 = std::min(nc - 1, ey + reach);

  for (int y = patch.ey0; y <= patch.ey1; ++y) {
    for (int x = patch.ex0; x <= patch.ex1; ++x) patch.element_set.push_back(mesh.element(x, y));
  }

  const int p = mesh.cells_per_coarse();
  patch.box = {patch.ex0 * p, (patch.ex1 + 1) * p, patch.ey0 * p, (patch.ey1 + 1) * p};

  const NodeBox& b = patch.box;
  patch.all_dofs.reserve(static_cast<std::size_t>(b.count()));
  for (int iy = b.y0; iy <= b.y1; ++iy) {
    for (int ix = b.x0; ix <= b.x1; ++ix) {
      const int id = mesh.node(ix, iy);
      patch.all_dofs.push_back(id);
      // Patch boundary nodes carry the zero trace; on a rectangle this also
      // covers every global Dirichlet node that lies in the patch.
      const bool on_boundary = ix == b.x0 || ix == b.x1 || iy == b.y0 || iy == b.y1;
      if (!on_boundary) patch.interior_dofs.push_back(id);
    }
  }
  return patch;
}

}  // namespace signms
