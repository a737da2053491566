#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

namespace spg {

/// Uniform conforming triangulation of the unit square (0,1)^2.
///
/// The square is divided into an N x N grid of cells; each cell is split
/// along its bottom-left -> top-right diagonal, giving 2*N^2 triangles of
/// equal area 1/(2*N^2). Vertices are numbered row-major, bottom row first.
/// Triangle vertex triples are counter-clockwise.
///
/// Fields that live on a mesh (ControlField, StateField) keep a pointer to
/// the owning TriMesh; the mesh must outlive them.
struct TriMesh {
  int n_divisions = 0;                            // N
  Eigen::Matrix<double, Eigen::Dynamic, 2> vertices;
  std::vector<std::array<int, 3>> triangles;      // CCW vertex indices
  std::vector<bool> boundary_mask;                // true exactly on boundary vertices
  Eigen::VectorXd areas;                          // per-triangle, all equal here
  double h_max = 0.0;                             // max element diameter = sqrt(2)/N

  // Interior-vertex numbering used for Dirichlet elimination.
  std::vector<int> interior_index;                // vertex -> interior dof, -1 on boundary
  std::vector<int> interior_vertices;             // interior dof -> vertex
  int n_interior = 0;

  int n_vertices() const { return static_cast<int>(vertices.rows()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  /// Centroid of triangle t.
  Eigen::Vector2d centroid(int t) const;
};

/// Builds the uniform mesh with N subdivisions per side. Throws
/// std::invalid_argument for N < 1.
TriMesh build_mesh(int n_divisions);

}  // namespace spg
