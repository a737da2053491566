#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "spgrad/mesh.hpp"

namespace spg {

struct MeshMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Piecewise-constant (P0) field over the triangles of a mesh; the control
/// variable of the optimization. Immutable value type: arithmetic produces
/// new fields.
class ControlField {
 public:
  ControlField(const TriMesh& mesh, Eigen::VectorXd values);

  static ControlField zero(const TriMesh& mesh);
  static ControlField constant(const TriMesh& mesh, double c);

  const Eigen::VectorXd& values() const { return values_; }
  const TriMesh& mesh() const { return *mesh_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int t) const { return values_[t]; }

  friend ControlField operator+(const ControlField& a, const ControlField& b);
  friend ControlField operator-(const ControlField& a, const ControlField& b);
  friend ControlField operator*(double s, const ControlField& a);

 private:
  const TriMesh* mesh_;
  Eigen::VectorXd values_;
};

/// Piecewise-linear (P1) nodal field with homogeneous Dirichlet boundary;
/// state or adjoint variable. Boundary entries are forced to exactly zero on
/// construction (the space is a subspace of H^1_0).
class StateField {
 public:
  StateField(const TriMesh& mesh, Eigen::VectorXd nodal_values);

  static StateField zero(const TriMesh& mesh);
  /// Vertex interpolation of an analytic function (boundary entries zeroed).
  template <class F>
  static StateField from_function(const TriMesh& mesh, F&& f) {
    Eigen::VectorXd v(mesh.n_vertices());
    for (int i = 0; i < mesh.n_vertices(); ++i) {
      v[i] = f(mesh.vertices(i, 0), mesh.vertices(i, 1));
    }
    return StateField(mesh, std::move(v));
  }

  const Eigen::VectorXd& values() const { return values_; }
  const TriMesh& mesh() const { return *mesh_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int v) const { return values_[v]; }

  friend StateField operator+(const StateField& a, const StateField& b);
  friend StateField operator-(const StateField& a, const StateField& b);
  friend StateField operator*(double s, const StateField& a);

 private:
  const TriMesh* mesh_;
  Eigen::VectorXd values_;
};

/// L2(D) inner product of P0 fields: sum_T |T| u_T v_T.
double inner_l2_p0(const ControlField& u, const ControlField& v);

/// L2(D) norm of a P0 field.
double norm_l2_p0(const ControlField& u);

/// L1(D) norm of a P0 field: sum_T |T| |u_T|.
double norm_l1_p0(const ControlField& u);

/// Exact L2(D) inner product of P1 fields (local mass matrix |T|/12 [2 1 1; ...]).
double inner_l2_p1(const StateField& v, const StateField& w);

/// L2(D) norm of a P1 field.
double norm_l2_p1(const StateField& v);

/// Box constraint set {u : lower <= u <= upper} with uniform scalar bounds
/// or optional per-triangle bounds.
struct BoxSet {
  double lower;
  double upper;
  Eigen::VectorXd lower_cells;  // empty unless per-cell bounds are used
  Eigen::VectorXd upper_cells;

  BoxSet(double lo, double hi);
  BoxSet(Eigen::VectorXd lo, Eigen::VectorXd hi);

  static BoxSet unbounded();
  static BoxSet symmetric(double b) { return BoxSet(-b, b); }

  bool per_cell() const { return lower_cells.size() > 0; }
  double lo(int t) const { return per_cell() ? lower_cells[t] : lower; }
  double hi(int t) const { return per_cell() ? upper_cells[t] : upper; }
  bool contains(const ControlField& u) const;
};

// Inner-product hooks used by the generic optimization loops.
inline double vec_dot(const ControlField& a, const ControlField& b) {
  return inner_l2_p0(a, b);
}
inline double vec_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(b);
}
inline double vec_max_abs(const ControlField& a) {
  return a.values().size() ? a.values().cwiseAbs().maxCoeff() : 0.0;
}
inline double vec_max_abs(const Eigen::VectorXd& a) {
  return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace spg
