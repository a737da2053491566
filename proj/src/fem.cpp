#include "spgrad/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/SparseCholesky>

namespace spg {

namespace {

void require_mesh(const FemContext& fem, const TriMesh& other, const char* what) {
  if (&fem.mesh() != &other) {
    throw MeshMismatchError(std::string(what) + ": field mesh differs from context mesh");
  }
}

void require_sample_shape(const FemContext& fem, const CoefficientSample& c, const char* what) {
  const int nt = fem.mesh().n_triangles();
  if (c.a_stiff.rows() != nt || c.a_stiff.cols() != kNumStiffPoints ||
      c.r_react.rows() != nt || c.r_react.cols() != kNumReactPoints) {
    throw std::invalid_argument(std::string(what) + ": coefficient sample shape mismatch");
  }
}

}  // namespace

FemContext::FemContext(const TriMesh& mesh) : mesh_(&mesh) {
  const int nt = mesh.n_triangles();
  stiff_local_.resize(static_cast<std::size_t>(nt));
  stiff_pts_.resize(kNumStiffPoints * nt, 2);
  react_pts_.resize(kNumReactPoints * nt, 2);

  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    Eigen::Vector2d p[3];
    for (int i = 0; i < 3; ++i) p[i] = mesh.vertices.row(tri[i]).transpose();

    // Gradients of the barycentric basis; triangles are CCW so the signed
    // area equals |T|.
    const double area = mesh.areas[t];
    Eigen::Matrix<double, 2, 3> grads;
    grads.col(0) << p[1].y() - p[2].y(), p[2].x() - p[1].x();
    grads.col(1) << p[2].y() - p[0].y(), p[0].x() - p[2].x();
    grads.col(2) << p[0].y() - p[1].y(), p[1].x() - p[0].x();
    grads /= 2.0 * area;
    stiff_local_[static_cast<std::size_t>(t)] = area * grads.transpose() * grads;

    for (int q = 0; q < kNumStiffPoints; ++q) {
      Eigen::Vector2d x = Eigen::Vector2d::Zero();
      for (int i = 0; i < 3; ++i) x += kEdgeMidpointRule[q].bary[i] * p[i];
      stiff_pts_.row(kNumStiffPoints * t + q) = x.transpose();
    }
    for (int q = 0; q < kNumReactPoints; ++q) {
      Eigen::Vector2d x = Eigen::Vector2d::Zero();
      for (int i = 0; i < 3; ++i) x += kDegree4Rule[q].bary[i] * p[i];
      react_pts_.row(kNumReactPoints * t + q) = x.transpose();
    }
  }

  // Interior sparsity pattern and slot addresses for fast reassembly.
  const int ni = mesh.n_interior;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(9 * nt));
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int ii = mesh.interior_index[static_cast<std::size_t>(tri[i])];
        const int jj = mesh.interior_index[static_cast<std::size_t>(tri[j])];
        if (ii >= 0 && jj >= 0) trips.emplace_back(ii, jj, 1.0);
      }
    }
  }
  pattern_.resize(ni, ni);
  pattern_.setFromTriplets(trips.begin(), trips.end());
  pattern_.makeCompressed();

  slot_.assign(static_cast<std::size_t>(9 * nt), -1);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int ii = mesh.interior_index[static_cast<std::size_t>(tri[i])];
        const int jj = mesh.interior_index[static_cast<std::size_t>(tri[j])];
        if (ii < 0 || jj < 0) continue;
        const int* begin = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[jj];
        const int* end = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[jj + 1];
        const int* it = std::lower_bound(begin, end, ii);
        slot_[static_cast<std::size_t>(9 * t + 3 * i + j)] =
            static_cast<int>(pattern_.outerIndexPtr()[jj] + (it - begin));
      }
    }
  }
}

Eigen::VectorXd FemContext::assemble_stiffness_values(const CoefficientSample& coeffs) const {
  require_sample_shape(*this, coeffs, "assemble_stiffness_values");
  Eigen::VectorXd values = Eigen::VectorXd::Zero(pattern_.nonZeros());
  const int nt = mesh_->n_triangles();
  for (int t = 0; t < nt; ++t) {
    const double a_bar = coeffs.a_stiff.row(t).mean();
    const Eigen::Matrix3d& local = stiff_local_[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int s = slot_[static_cast<std::size_t>(9 * t + 3 * i + j)];
        if (s >= 0) values[s] += a_bar * local(i, j);
      }
    }
  }
  return values;
}

Eigen::SparseMatrix<double> FemContext::matrix_from_values(const Eigen::VectorXd& values) const {
  Eigen::Map<const Eigen::SparseMatrix<double>> map(
      pattern_.rows(), pattern_.cols(), pattern_.nonZeros(), pattern_.outerIndexPtr(),
      pattern_.innerIndexPtr(), values.data());
  return Eigen::SparseMatrix<double>(map);
}

void FemContext::add_reaction_jacobian(const CoefficientSample& coeffs,
                                       const Eigen::VectorXd& y_full, double factor,
                                       Eigen::VectorXd& values) const {
  const int nt = mesh_->n_triangles();
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh_->triangles[static_cast<std::size_t>(t)];
    const double area = mesh_->areas[t];
    double local[3][3] = {};
    for (int q = 0; q < kNumReactPoints; ++q) {
      const auto& bary = kDegree4Rule[q].bary;
      const double y_q = bary[0] * y_full[tri[0]] + bary[1] * y_full[tri[1]] +
                         bary[2] * y_full[tri[2]];
      const double w = factor * area * kDegree4Rule[q].weight *
                       coeffs.r_react(t, q) * y_q * y_q;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) local[i][j] += w * bary[i] * bary[j];
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int s = slot_[static_cast<std::size_t>(9 * t + 3 * i + j)];
        if (s >= 0) values[s] += local[i][j];
      }
    }
  }
}

void FemContext::add_reaction_residual(const CoefficientSample& coeffs,
                                       const Eigen::VectorXd& y_full,
                                       Eigen::VectorXd& r_interior) const {
  const int nt = mesh_->n_triangles();
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh_->triangles[static_cast<std::size_t>(t)];
    const double area = mesh_->areas[t];
    for (int q = 0; q < kNumReactPoints; ++q) {
      const auto& bary = kDegree4Rule[q].bary;
      const double y_q = bary[0] * y_full[tri[0]] + bary[1] * y_full[tri[1]] +
                         bary[2] * y_full[tri[2]];
      const double w = area * kDegree4Rule[q].weight * coeffs.r_react(t, q) * y_q * y_q * y_q;
      for (int i = 0; i < 3; ++i) {
        const int ii = mesh_->interior_index[static_cast<std::size_t>(tri[i])];
        if (ii >= 0) r_interior[ii] += w * bary[i];
      }
    }
  }
}

Eigen::VectorXd FemContext::load_vector(const ControlField& u) const {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh_->n_interior);
  const int nt = mesh_->n_triangles();
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh_->triangles[static_cast<std::size_t>(t)];
    const double w = u[t] * mesh_->areas[t] / 3.0;  // exact: integral of P1 basis
    for (int i = 0; i < 3; ++i) {
      const int ii = mesh_->interior_index[static_cast<std::size_t>(tri[i])];
      if (ii >= 0) load[ii] += w;
    }
  }
  return load;
}

Eigen::VectorXd FemContext::tracking_rhs(const Eigen::VectorXd& y_full,
                                         const Eigen::VectorXd& ref_react) const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mesh_->n_interior);
  const int nt = mesh_->n_triangles();
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh_->triangles[static_cast<std::size_t>(t)];
    const double area = mesh_->areas[t];
    for (int q = 0; q < kNumReactPoints; ++q) {
      const auto& bary = kDegree4Rule[q].bary;
      const double y_q = bary[0] * y_full[tri[0]] + bary[1] * y_full[tri[1]] +
                         bary[2] * y_full[tri[2]];
      const double w = area * kDegree4Rule[q].weight *
                       (ref_react[kNumReactPoints * t + q] - y_q);
      for (int i = 0; i < 3; ++i) {
        const int ii = mesh_->interior_index[static_cast<std::size_t>(tri[i])];
        if (ii >= 0) rhs[ii] += w * bary[i];
      }
    }
  }
  return rhs;
}

Eigen::SparseMatrix<double> stiffness_matrix(const FemContext& fem,
                                             const CoefficientSample& coeffs) {
  return fem.matrix_from_values(fem.assemble_stiffness_values(coeffs));
}

std::pair<StateField, NewtonReport> solve_state(const FemContext& fem,
                                                const CoefficientSample& coeffs,
                                                const ControlField& u,
                                                const NewtonOptions& opts) {
  const TriMesh& mesh = fem.mesh();
  require_mesh(fem, u.mesh(), "solve_state");
  require_sample_shape(fem, coeffs, "solve_state");

  NewtonReport report;
  Eigen::VectorXd y_full = Eigen::VectorXd::Zero(mesh.n_vertices());
  const int ni = fem.n_interior();
  if (ni == 0) {
    report.iterations = 1;
    report.converged = true;
    report.residual_history = {0.0};
    return {StateField(mesh, std::move(y_full)), report};
  }

  const Eigen::VectorXd k_values = fem.assemble_stiffness_values(coeffs);
  const Eigen::SparseMatrix<double> stiffness = fem.matrix_from_values(k_values);
  const Eigen::VectorXd load = fem.load_vector(u);

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver;
  bool analyzed = false;
  Eigen::VectorXd y_int = Eigen::VectorXd::Zero(ni);

  for (int steps = 0;; ++steps) {
    Eigen::VectorXd resid = stiffness * y_int - load;
    fem.add_reaction_residual(coeffs, y_full, resid);
    const double rn = resid.norm();
    report.residual_history.push_back(rn);
    report.final_residual_norm = rn;
    if (rn <= opts.tol) {
      report.converged = true;
      break;
    }
    if (steps >= opts.max_iters) {
      report.converged = false;
      break;
    }

    Eigen::VectorXd jac_values = k_values;
    fem.add_reaction_jacobian(coeffs, y_full, 3.0, jac_values);
    Eigen::SparseMatrix<double> jac = fem.matrix_from_values(jac_values);
    if (!analyzed) {
      solver.analyzePattern(jac);
      analyzed = true;
    }
    solver.factorize(jac);
    if (solver.info() != Eigen::Success) {
      throw LinearSolveError("solve_state: Cholesky factorization failed (indefinite system)");
    }
    y_int -= solver.solve(resid);
    for (int d = 0; d < ni; ++d) y_full[mesh.interior_vertices[static_cast<std::size_t>(d)]] = y_int[d];
  }
  report.iterations = static_cast<int>(report.residual_history.size());
  return {StateField(mesh, std::move(y_full)), report};
}

StateField solve_adjoint(const FemContext& fem, const CoefficientSample& coeffs,
                         const StateField& y, const Eigen::VectorXd& yd_react) {
  const TriMesh& mesh = fem.mesh();
  require_mesh(fem, y.mesh(), "solve_adjoint");
  require_sample_shape(fem, coeffs, "solve_adjoint");
  if (yd_react.size() != kNumReactPoints * mesh.n_triangles()) {
    throw std::invalid_argument("solve_adjoint: yd_react size mismatch");
  }

  Eigen::VectorXd p_full = Eigen::VectorXd::Zero(mesh.n_vertices());
  const int ni = fem.n_interior();
  if (ni == 0) return StateField(mesh, std::move(p_full));

  Eigen::VectorXd values = fem.assemble_stiffness_values(coeffs);
  fem.add_reaction_jacobian(coeffs, y.values(), 3.0, values);
  const Eigen::SparseMatrix<double> mat = fem.matrix_from_values(values);
  const Eigen::VectorXd rhs = fem.tracking_rhs(y.values(), yd_react);

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(mat);
  if (solver.info() != Eigen::Success) {
    throw LinearSolveError("solve_adjoint: Cholesky factorization failed (indefinite system)");
  }
  const Eigen::VectorXd p_int = solver.solve(rhs);
  if (solver.info() != Eigen::Success) {
    throw LinearSolveError("solve_adjoint: linear solve failed");
  }
  for (int d = 0; d < ni; ++d) p_full[mesh.interior_vertices[static_cast<std::size_t>(d)]] = p_int[d];
  return StateField(mesh, std::move(p_full));
}

StateField solve_adjoint(const FemContext& fem, const CoefficientSample& coeffs,
                         const StateField& y, const ScalarFn& y_d) {
  return solve_adjoint(fem, coeffs, y, evaluate_at_react_points(fem, y_d));
}

ControlField project_p1_to_p0(const TriMesh& mesh, const StateField& v) {
  if (&mesh != &v.mesh()) throw MeshMismatchError("project_p1_to_p0: mesh mismatch");
  Eigen::VectorXd u(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    u[t] = (v[tri[0]] + v[tri[1]] + v[tri[2]]) / 3.0;
  }
  return ControlField(mesh, std::move(u));
}

CoefficientSample make_coefficient_sample(const FemContext& fem, const KLFieldSpec& a_spec,
                                          const Eigen::VectorXd& xi_a,
                                          const KLFieldSpec& r_spec,
                                          const Eigen::VectorXd& xi_r, double a_floor) {
  const int nt = fem.mesh().n_triangles();
  CoefficientSample s;
  s.a_stiff.resize(nt, kNumStiffPoints);
  s.r_react.resize(nt, kNumReactPoints);
  for (int t = 0; t < nt; ++t) {
    for (int q = 0; q < kNumStiffPoints; ++q) {
      const auto x = fem.stiff_points().row(kNumStiffPoints * t + q);
      double a = evaluate_field(a_spec, xi_a, x[0], x[1]);
      if (a < a_floor) {
        a = a_floor;
        ++s.clamped_a;
      }
      s.a_stiff(t, q) = a;
    }
    for (int q = 0; q < kNumReactPoints; ++q) {
      const auto x = fem.react_points().row(kNumReactPoints * t + q);
      double r = evaluate_field(r_spec, xi_r, x[0], x[1]);
      if (r < 0.0) {
        r = 0.0;
        ++s.clamped_r;
      }
      s.r_react(t, q) = r;
    }
  }
  return s;
}

CoefficientSample make_constant_coefficients(const FemContext& fem, double a, double r) {
  const int nt = fem.mesh().n_triangles();
  CoefficientSample s;
  s.a_stiff = Eigen::MatrixXd::Constant(nt, kNumStiffPoints, a);
  s.r_react = Eigen::MatrixXd::Constant(nt, kNumReactPoints, r);
  return s;
}

Eigen::VectorXd evaluate_at_react_points(const FemContext& fem, const ScalarFn& f) {
  const auto& pts = fem.react_points();
  Eigen::VectorXd v(pts.rows());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) v[i] = f(pts(i, 0), pts(i, 1));
  return v;
}

double tracking_misfit(const FemContext& fem, const StateField& v,
                       const Eigen::VectorXd& ref_react) {
  const TriMesh& mesh = fem.mesh();
  require_mesh(fem, v.mesh(), "tracking_misfit");
  double acc = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int q = 0; q < kNumReactPoints; ++q) {
      const auto& bary = kDegree4Rule[q].bary;
      const double v_q = bary[0] * v[tri[0]] + bary[1] * v[tri[1]] + bary[2] * v[tri[2]];
      const double d = v_q - ref_react[kNumReactPoints * t + q];
      acc += mesh.areas[t] * kDegree4Rule[q].weight * d * d;
    }
  }
  return acc;
}

double l2_error_vs_function(const FemContext& fem, const StateField& v, const ScalarFn& f) {
  return std::sqrt(tracking_misfit(fem, v, evaluate_at_react_points(fem, f)));
}

ControlField project_to_p0(const FemContext& fem, const ScalarFn& f) {
  const TriMesh& mesh = fem.mesh();
  Eigen::VectorXd u(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    double acc = 0.0;
    for (int q = 0; q < kNumReactPoints; ++q) {
      const auto x = fem.react_points().row(kNumReactPoints * t + q);
      acc += kDegree4Rule[q].weight * f(x[0], x[1]);
    }
    u[t] = acc;  // weights sum to 1: quadrature mean over the triangle
  }
  return ControlField(mesh, std::move(u));
}

void write_p0_csv(const ControlField& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_p0_csv: cannot open " + path);
  out << "triangle,cx,cy,value\n";
  char buf[96];
  for (int t = 0; t < u.size(); ++t) {
    const Eigen::Vector2d c = u.mesh().centroid(t);
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", t, c.x(), c.y(), u[t]);
    out << buf;
  }
}

}  // namespace spg
