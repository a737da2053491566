#include "spgrad/fields.hpp"

#include <cmath>
#include <limits>

namespace spg {

namespace {

void require_same_mesh(const TriMesh* a, const TriMesh* b, const char* what) {
  if (a != b) throw MeshMismatchError(std::string(what) + ": fields live on different meshes");
}

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace

ControlField::ControlField(const TriMesh& mesh, Eigen::VectorXd values)
    : mesh_(&mesh), values_(std::move(values)) {
  if (values_.size() != mesh.n_triangles()) {
    throw std::invalid_argument("ControlField: length must equal triangle count");
  }
  require_finite(values_, "ControlField");
}

ControlField ControlField::zero(const TriMesh& mesh) {
  return ControlField(mesh, Eigen::VectorXd::Zero(mesh.n_triangles()));
}

ControlField ControlField::constant(const TriMesh& mesh, double c) {
  return ControlField(mesh, Eigen::VectorXd::Constant(mesh.n_triangles(), c));
}

ControlField operator+(const ControlField& a, const ControlField& b) {
  require_same_mesh(a.mesh_, b.mesh_, "ControlField+");
  return ControlField(*a.mesh_, a.values_ + b.values_);
}

ControlField operator-(const ControlField& a, const ControlField& b) {
  require_same_mesh(a.mesh_, b.mesh_, "ControlField-");
  return ControlField(*a.mesh_, a.values_ - b.values_);
}

ControlField operator*(double s, const ControlField& a) {
  return ControlField(*a.mesh_, s * a.values_);
}

StateField::StateField(const TriMesh& mesh, Eigen::VectorXd nodal_values)
    : mesh_(&mesh), values_(std::move(nodal_values)) {
  if (values_.size() != mesh.n_vertices()) {
    throw std::invalid_argument("StateField: length must equal vertex count");
  }
  require_finite(values_, "StateField");
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.boundary_mask[static_cast<std::size_t>(v)]) values_[v] = 0.0;
  }
}

StateField StateField::zero(const TriMesh& mesh) {
  return StateField(mesh, Eigen::VectorXd::Zero(mesh.n_vertices()));
}

StateField operator+(const StateField& a, const StateField& b) {
  require_same_mesh(a.mesh_, b.mesh_, "StateField+");
  return StateField(*a.mesh_, a.values_ + b.values_);
}

StateField operator-(const StateField& a, const StateField& b) {
  require_same_mesh(a.mesh_, b.mesh_, "StateField-");
  return StateField(*a.mesh_, a.values_ - b.values_);
}

StateField operator*(double s, const StateField& a) {
  return StateField(*a.mesh_, s * a.values_);
}

double inner_l2_p0(const ControlField& u, const ControlField& v) {
  require_same_mesh(&u.mesh(), &v.mesh(), "inner_l2_p0");
  // u*v first keeps the evaluation bitwise symmetric in (u, v).
  return ((u.values().array() * v.values().array()) * u.mesh().areas.array()).sum();
}

double norm_l2_p0(const ControlField& u) { return std::sqrt(inner_l2_p0(u, u)); }

double norm_l1_p0(const ControlField& u) {
  return (u.mesh().areas.array() * u.values().array().abs()).sum();
}

double inner_l2_p1(const StateField& v, const StateField& w) {
  require_same_mesh(&v.mesh(), &w.mesh(), "inner_l2_p1");
  const TriMesh& mesh = v.mesh();
  const auto& a = v.values();
  const auto& b = w.values();
  double acc = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const double s_a = a[tri[0]] + a[tri[1]] + a[tri[2]];
    const double s_b = b[tri[0]] + b[tri[1]] + b[tri[2]];
    const double diag = a[tri[0]] * b[tri[0]] + a[tri[1]] * b[tri[1]] + a[tri[2]] * b[tri[2]];
    acc += mesh.areas[t] / 12.0 * (s_a * s_b + diag);
  }
  return acc;
}

double norm_l2_p1(const StateField& v) { return std::sqrt(inner_l2_p1(v, v)); }

BoxSet::BoxSet(double lo, double hi) : lower(lo), upper(hi) {
  if (!(lo <= hi)) throw std::invalid_argument("BoxSet: lower > upper");
}

BoxSet::BoxSet(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(0), upper(0), lower_cells(std::move(lo)), upper_cells(std::move(hi)) {
  if (lower_cells.size() != upper_cells.size()) {
    throw std::invalid_argument("BoxSet: bound vectors differ in length");
  }
  if ((lower_cells.array() > upper_cells.array()).any()) {
    throw std::invalid_argument("BoxSet: lower > upper");
  }
}

BoxSet BoxSet::unbounded() {
  const double inf = std::numeric_limits<double>::infinity();
  return BoxSet(-inf, inf);
}

bool BoxSet::contains(const ControlField& u) const {
  for (int t = 0; t < u.size(); ++t) {
    if (u[t] < lo(t) || u[t] > hi(t)) return false;
  }
  return true;
}

}  // namespace spg
