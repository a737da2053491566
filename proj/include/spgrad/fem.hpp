#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "spgrad/fields.hpp"
#include "spgrad/mesh.hpp"
#include "spgrad/quadrature.hpp"
#include "spgrad/random_field.hpp"

namespace spg {

using ScalarFn = std::function<double(double, double)>;

/// Coefficient fields of one random sample, evaluated at the quadrature
/// points assembly actually uses: the diffusion coefficient a at the
/// edge-midpoint (stiffness) points and the reaction coefficient r at the
/// degree-4 points. Values arrive clamped (a >= a_floor, r >= 0); the clamp
/// counters record how many evaluations were affected.
struct CoefficientSample {
  Eigen::MatrixXd a_stiff;  // n_triangles x 3
  Eigen::MatrixXd r_react;  // n_triangles x 6
  long clamped_a = 0;
  long clamped_r = 0;

  double a_min() const { return a_stiff.size() ? a_stiff.minCoeff() : 0.0; }
  long clamp_count() const { return clamped_a + clamped_r; }
};

struct NewtonOptions {
  double tol = 1e-10;   // discrete l2 norm of the algebraic residual
  int max_iters = 30;   // Newton steps
};

struct NewtonReport {
  int iterations = 0;  // residual evaluations performed, incl. the accepting one
  double final_residual_norm = 0.0;
  bool converged = false;
  std::vector<double> residual_history;
};

struct NewtonFailure : std::runtime_error {
  NewtonReport report;
  NewtonFailure(const std::string& msg, NewtonReport rep)
      : std::runtime_error(msg), report(std::move(rep)) {}
};

struct LinearSolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-mesh assembly cache: element geometry, quadrature point coordinates,
/// and the interior sparsity pattern with direct value-slot addressing.
/// Immutable after construction and safe to share across threads.
class FemContext {
 public:
  explicit FemContext(const TriMesh& mesh);

  const TriMesh& mesh() const { return *mesh_; }

  /// Global coordinates of the stiffness-rule points, row index 3*t + q.
  const Eigen::MatrixXd& stiff_points() const { return stiff_pts_; }
  /// Global coordinates of the degree-4 points, row index 6*t + q.
  const Eigen::MatrixXd& react_points() const { return react_pts_; }

  /// Local stiffness geometry |T| * grad(l_i) . grad(l_j) for triangle t.
  const Eigen::Matrix3d& stiff_local(int t) const { return stiff_local_[t]; }

  int n_interior() const { return mesh_->n_interior; }

  /// a-weighted stiffness values on the interior pattern (flat nnz array).
  Eigen::VectorXd assemble_stiffness_values(const CoefficientSample& coeffs) const;

  /// Sparse interior matrix from a flat nnz value array.
  Eigen::SparseMatrix<double> matrix_from_values(const Eigen::VectorXd& values) const;

  // Internal assembly helpers shared by the solvers (flat value arrays are
  // indexed by the cached sparsity pattern).
  void add_reaction_jacobian(const CoefficientSample& coeffs, const Eigen::VectorXd& y_full,
                             double factor, Eigen::VectorXd& values) const;
  void add_reaction_residual(const CoefficientSample& coeffs, const Eigen::VectorXd& y_full,
                             Eigen::VectorXd& r_interior) const;
  Eigen::VectorXd load_vector(const ControlField& u) const;
  Eigen::VectorXd tracking_rhs(const Eigen::VectorXd& y_full,
                               const Eigen::VectorXd& ref_react) const;

 private:
  const TriMesh* mesh_;
  std::vector<Eigen::Matrix3d> stiff_local_;
  Eigen::MatrixXd stiff_pts_;
  Eigen::MatrixXd react_pts_;
  Eigen::SparseMatrix<double> pattern_;   // interior x interior, compressed
  std::vector<int> slot_;                 // (t*9 + 3*i + j) -> nnz slot, -1 if eliminated
};

/// a-weighted stiffness matrix on interior dofs (row/column elimination of
/// the Dirichlet boundary). Symmetric positive definite.
Eigen::SparseMatrix<double> stiffness_matrix(const FemContext& fem,
                                             const CoefficientSample& coeffs);

/// Solves the discrete semilinear state equation
///   -div(a grad y) + r y^3 = u,   y = 0 on the boundary,
/// by undamped Newton from y = 0. Returns the state and a report; the report
/// is flagged (not thrown) if Newton fails to reach the tolerance.
std::pair<StateField, NewtonReport> solve_state(const FemContext& fem,
                                                const CoefficientSample& coeffs,
                                                const ControlField& u,
                                                const NewtonOptions& opts = {});

/// Solves the linear adjoint equation
///   -div(a grad p) + 3 r y^2 p = y_D - y,   p = 0 on the boundary,
/// where yd_react holds y_D at the degree-4 points (row 6*t + q).
StateField solve_adjoint(const FemContext& fem, const CoefficientSample& coeffs,
                         const StateField& y, const Eigen::VectorXd& yd_react);
StateField solve_adjoint(const FemContext& fem, const CoefficientSample& coeffs,
                         const StateField& y, const ScalarFn& y_d);

/// L2 projection of a P1 field onto P0: per-triangle mean, which for P1
/// equals the average of the three vertex values.
ControlField project_p1_to_p0(const TriMesh& mesh, const StateField& v);

/// Coefficient sample from KL expansions, clamped to a >= a_floor, r >= 0.
CoefficientSample make_coefficient_sample(const FemContext& fem, const KLFieldSpec& a_spec,
                                          const Eigen::VectorXd& xi_a,
                                          const KLFieldSpec& r_spec,
                                          const Eigen::VectorXd& xi_r, double a_floor);

/// Constant coefficients (manufactured-solution and test instances).
CoefficientSample make_constant_coefficients(const FemContext& fem, double a, double r);

/// Evaluates an analytic function at the degree-4 points (row 6*t + q).
Eigen::VectorXd evaluate_at_react_points(const FemContext& fem, const ScalarFn& f);

/// Degree-4 quadrature of (v - ref)^2 over the mesh; ref given at the
/// degree-4 points.
double tracking_misfit(const FemContext& fem, const StateField& v,
                       const Eigen::VectorXd& ref_react);

/// Discrete L2 distance between a P1 field and an analytic function
/// (degree-4 quadrature).
double l2_error_vs_function(const FemContext& fem, const StateField& v, const ScalarFn& f);

/// P0 projection of an analytic function: per-triangle quadrature mean.
ControlField project_to_p0(const FemContext& fem, const ScalarFn& f);

/// Dumps a P0 field as CSV rows (triangle,cx,cy,value).
void write_p0_csv(const ControlField& u, const std::string& path);

}  // namespace spg
