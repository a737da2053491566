#include "spgrad/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace spg {

Eigen::Vector2d TriMesh::centroid(int t) const {
  const auto& tri = triangles[static_cast<std::size_t>(t)];
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int v : tri) c += vertices.row(v).transpose();
  return c / 3.0;
}

TriMesh build_mesh(int n_divisions) {
  if (n_divisions < 1) {
    throw std::invalid_argument("build_mesh: n_divisions must be >= 1");
  }
  const int n = n_divisions;
  const int nv_side = n + 1;

  TriMesh mesh;
  mesh.n_divisions = n;
  mesh.vertices.resize(nv_side * nv_side, 2);
  mesh.boundary_mask.assign(static_cast<std::size_t>(nv_side * nv_side), false);

  const double h = 1.0 / n;
  for (int iy = 0; iy < nv_side; ++iy) {
    for (int ix = 0; ix < nv_side; ++ix) {
      const int v = iy * nv_side + ix;
      mesh.vertices(v, 0) = ix * h;
      mesh.vertices(v, 1) = iy * h;
      mesh.boundary_mask[static_cast<std::size_t>(v)] =
          (ix == 0 || iy == 0 || ix == n || iy == n);
    }
  }

  mesh.triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int bl = iy * nv_side + ix;
      const int br = bl + 1;
      const int tl = bl + nv_side;
      const int tr = tl + 1;
      // Split along the bl -> tr diagonal; both triangles CCW.
      mesh.triangles.push_back({bl, br, tr});
      mesh.triangles.push_back({bl, tr, tl});
    }
  }

  mesh.areas = Eigen::VectorXd::Constant(2 * n * n, 1.0 / (2.0 * n * n));
  mesh.h_max = std::sqrt(2.0) / n;

  mesh.interior_index.assign(static_cast<std::size_t>(mesh.n_vertices()), -1);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (!mesh.boundary_mask[static_cast<std::size_t>(v)]) {
      mesh.interior_index[static_cast<std::size_t>(v)] = mesh.n_interior++;
      mesh.interior_vertices.push_back(v);
    }
  }
  return mesh;
}

}  // namespace spg
