#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <utility>

#include "spgrad/fem.hpp"
#include "spgrad/fields.hpp"
#include "spgrad/prox.hpp"
#include "spgrad/random_field.hpp"

namespace spg {

/// Squared Poincare constant of the unit square, C_p^2 = 1/(2 pi^2); used by
/// the a-priori bound diagnostics through C_1(xi) = C_p^2 / a_min(xi).
inline const double kPoincareSqUnitSquare = 0.050660591821168886;

/// Monitoring batch sizes m(n) = scale * floor(n / period) + base, with the
/// rolling-window termination tolerance.
struct EstimatorRule {
  int scale = 10;
  int period = 50;
  int base = 1;
  int window = 50;
  double tol = 2e-4;

  int batch_size(long n) const {
    return std::max(1, scale * static_cast<int>(n / period) + base);
  }
  /// Total samples consumed by iterations 1 .. n-1 (their starting index).
  std::uint64_t offset(long n) const;
};

struct ProblemSpec {
  const TriMesh* mesh = nullptr;
  KLFieldSpec a_spec;
  KLFieldSpec r_spec;
  ScalarFn y_d;
  double lambda1 = 0.008;
  double lambda2 = 0.001;
  BoxSet box = BoxSet::symmetric(0.5);
  double a_floor = 1e-3;
  NewtonOptions newton;
  bool bound_warnings = true;  // a-priori bound checks, warning-level only
};

/// One-sample evaluations sharing a single state solve.
struct PointSample {
  double j_value = 0.0;        // (1/2)||y - y_D||^2 + (lambda2/2)||u||^2
  ControlField gradient;       // lambda2 u - P0(p)
  long clamp_count = 0;
  NewtonReport newton;
};

/// The tracking-type control problem under uncertainty: objective samples,
/// adjoint-based stochastic gradients, and Monte Carlo monitoring
/// estimators. Immutable after construction; all evaluation methods are
/// const and safe to call concurrently.
class SemilinearProblem {
 public:
  explicit SemilinearProblem(ProblemSpec spec);

  const ProblemSpec& spec() const { return spec_; }
  const FemContext& fem() const { return fem_; }
  const TriMesh& mesh() const { return *spec_.mesh; }
  const ProxSpec& prox_spec() const { return prox_; }
  const Eigen::VectorXd& yd_react() const { return yd_react_; }
  EstimatorRule estimator_rule;

  /// KL coefficient sample, clamped (a >= a_floor, r >= 0) with counters.
  CoefficientSample coefficients(const SampleVector& xi) const;

  /// J(u, xi): solves the state equation, integrates the tracking misfit.
  /// Newton failures propagate as NewtonFailure.
  double objective_sample(const ControlField& u, const SampleVector& xi) const;

  /// G(u, xi) = lambda2 u - P0(p(u, xi)): the P0-projected adjoint gradient.
  ControlField stochastic_gradient(const ControlField& u, const SampleVector& xi) const;

  /// Objective and gradient from one shared state solve.
  PointSample sample(const ControlField& u, const SampleVector& xi) const;

  struct Estimate {
    double f_hat = 0.0;
    double r_n = 0.0;
    int m = 0;
    long clamp_count = 0;
  };

  /// f_hat_n: batch mean of J over m(n) fresh estimator-lane samples plus
  /// the L1 term. Returns (f_hat, samples used).
  std::pair<double, int> estimate_objective(const ControlField& u, long n,
                                            std::uint64_t seed) const;

  /// r_n over the same estimator batch as estimate_objective.
  double estimate_stationarity(const ControlField& u, long n, std::uint64_t seed) const;

  /// Combined monitor used by the experiment drivers; draws the same samples
  /// as the two standalone estimators (indices index_offset .. +m-1 of the
  /// estimator lane). Batch members may run in parallel; the reduction order
  /// is fixed.
  Estimate monitor(const ControlField& u, long n, std::uint64_t seed,
                   std::uint64_t index_offset, int threads) const;

 private:
  ProblemSpec spec_;
  FemContext fem_;
  ProxSpec prox_;
  Eigen::MatrixXd phi_a_;       // (3T x m): sqrt(lambda_i) phi_i at stiffness points
  Eigen::MatrixXd phi_r_;       // (6T x m): sqrt(lambda_i) phi_i at reaction points
  Eigen::VectorXd yd_react_;    // y_D at reaction points
  mutable std::atomic<long> bound_warnings_emitted_{0};

  StateField solved_state(const ControlField& u, const CoefficientSample& coeffs,
                          NewtonReport* report) const;
  void check_bounds(const ControlField& u, const StateField& y, const StateField* p,
                    const CoefficientSample& coeffs) const;
};

/// Named analytic descriptors for y_D and u_1 ("sin2pi-exp", "sin4pi", "sinpi",
/// "poisson", "zero", "const:<v>"). Throws on unknown names.
ScalarFn make_scalar_descriptor(const std::string& name);

}  // namespace spg
