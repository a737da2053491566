#include "spgrad/problem.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spgrad/parallel.hpp"

namespace spg {

std::uint64_t EstimatorRule::offset(long n) const {
  std::uint64_t acc = 0;
  for (long k = 1; k < n; ++k) acc += static_cast<std::uint64_t>(batch_size(k));
  return acc;
}

namespace {

Eigen::MatrixXd kl_table(const KLFieldSpec& spec, const Eigen::MatrixXd& points) {
  Eigen::MatrixXd phi(points.rows(), spec.n_terms);
  for (int i = 0; i < spec.n_terms; ++i) {
    const auto& ep = spec.eigenpairs[static_cast<std::size_t>(i)];
    for (Eigen::Index p = 0; p < points.rows(); ++p) {
      phi(p, i) = ep.sqrt_lambda * 2.0 *
                  std::cos(ep.j * std::numbers::pi * points(p, 1)) *
                  std::cos(ep.k * std::numbers::pi * points(p, 0));
    }
  }
  return phi;
}

ProxSpec prox_from_spec(const ProblemSpec& s) {
  if (s.lambda1 > 0.0) return ProxSpec::l1_box(s.lambda1, s.box);
  return ProxSpec::box_only(s.box);
}

}  // namespace

SemilinearProblem::SemilinearProblem(ProblemSpec spec)
    : spec_(std::move(spec)),
      fem_(*spec_.mesh),
      prox_(prox_from_spec(spec_)),
      phi_a_(kl_table(spec_.a_spec, fem_.stiff_points())),
      phi_r_(kl_table(spec_.r_spec, fem_.react_points())),
      yd_react_(evaluate_at_react_points(fem_, spec_.y_d)) {
  if (spec_.lambda1 < 0.0 || spec_.lambda2 < 0.0) {
    throw std::invalid_argument("SemilinearProblem: lambda1, lambda2 must be >= 0");
  }
}

CoefficientSample SemilinearProblem::coefficients(const SampleVector& xi) const {
  const int nt = mesh().n_triangles();
  CoefficientSample s;
  Eigen::VectorXd a_vals = phi_a_ * xi.xi_a;
  a_vals.array() += spec_.a_spec.mean;
  Eigen::VectorXd r_vals = phi_r_ * xi.xi_r;
  r_vals.array() += spec_.r_spec.mean;
  for (Eigen::Index i = 0; i < a_vals.size(); ++i) {
    if (a_vals[i] < spec_.a_floor) {
      a_vals[i] = spec_.a_floor;
      ++s.clamped_a;
    }
  }
  for (Eigen::Index i = 0; i < r_vals.size(); ++i) {
    if (r_vals[i] < 0.0) {
      r_vals[i] = 0.0;
      ++s.clamped_r;
    }
  }
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  s.a_stiff = Eigen::Map<RowMat>(a_vals.data(), nt, kNumStiffPoints);
  s.r_react = Eigen::Map<RowMat>(r_vals.data(), nt, kNumReactPoints);
  return s;
}

StateField SemilinearProblem::solved_state(const ControlField& u,
                                           const CoefficientSample& coeffs,
                                           NewtonReport* report) const {
  auto [y, rep] = solve_state(fem_, coeffs, u, spec_.newton);
  if (!rep.converged) {
    throw NewtonFailure("state solve did not converge: residual " +
                            std::to_string(rep.final_residual_norm) + " after " +
                            std::to_string(rep.iterations) + " residual evaluations",
                        rep);
  }
  if (report) *report = std::move(rep);
  return std::move(y);
}

void SemilinearProblem::check_bounds(const ControlField& u, const StateField& y,
                                     const StateField* p,
                                     const CoefficientSample& coeffs) const {
  if (!spec_.bound_warnings) return;
  const double c1 = kPoincareSqUnitSquare / coeffs.a_min();
  const double slack = 1e-9;
  bool violated = norm_l2_p1(y) > c1 * norm_l2_p0(u) + slack;
  if (p) {
    const double misfit = std::sqrt(tracking_misfit(fem_, y, yd_react_));
    violated = violated || norm_l2_p1(*p) > c1 * misfit + slack;
  }
  if (violated && bound_warnings_emitted_.fetch_add(1) < 5) {
    std::fprintf(stderr,
                 "[spgrad] warning: a-priori L2 bound violated (C1 = %g); "
                 "check assembly/coefficients\n",
                 c1);
  }
}

double SemilinearProblem::objective_sample(const ControlField& u, const SampleVector& xi) const {
  const CoefficientSample coeffs = coefficients(xi);
  const StateField y = solved_state(u, coeffs, nullptr);
  check_bounds(u, y, nullptr, coeffs);
  return 0.5 * tracking_misfit(fem_, y, yd_react_) + 0.5 * spec_.lambda2 * inner_l2_p0(u, u);
}

ControlField SemilinearProblem::stochastic_gradient(const ControlField& u,
                                                    const SampleVector& xi) const {
  const CoefficientSample coeffs = coefficients(xi);
  const StateField y = solved_state(u, coeffs, nullptr);
  const StateField p = solve_adjoint(fem_, coeffs, y, yd_react_);
  check_bounds(u, y, &p, coeffs);
  return spec_.lambda2 * u - project_p1_to_p0(mesh(), p);
}

PointSample SemilinearProblem::sample(const ControlField& u, const SampleVector& xi) const {
  const CoefficientSample coeffs = coefficients(xi);
  NewtonReport report;
  const StateField y = solved_state(u, coeffs, &report);
  const StateField p = solve_adjoint(fem_, coeffs, y, yd_react_);
  check_bounds(u, y, &p, coeffs);
  PointSample out{0.5 * tracking_misfit(fem_, y, yd_react_) +
                      0.5 * spec_.lambda2 * inner_l2_p0(u, u),
                  spec_.lambda2 * u - project_p1_to_p0(mesh(), p), coeffs.clamp_count(),
                  std::move(report)};
  return out;
}

std::pair<double, int> SemilinearProblem::estimate_objective(const ControlField& u, long n,
                                                             std::uint64_t seed) const {
  const int m = estimator_rule.batch_size(n);
  const std::uint64_t off = estimator_rule.offset(n);
  const std::uint64_t lane = sub_seed(seed, kLaneEstimator);
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    const SampleVector xi = draw_sample(lane, off + static_cast<std::uint64_t>(j),
                                        spec_.a_spec.n_terms);
    acc += objective_sample(u, xi);
  }
  return {acc / m + spec_.lambda1 * norm_l1_p0(u), m};
}

double SemilinearProblem::estimate_stationarity(const ControlField& u, long n,
                                                std::uint64_t seed) const {
  const int m = estimator_rule.batch_size(n);
  const std::uint64_t off = estimator_rule.offset(n);
  const std::uint64_t lane = sub_seed(seed, kLaneEstimator);
  std::optional<ControlField> sum;
  for (int j = 0; j < m; ++j) {
    const SampleVector xi = draw_sample(lane, off + static_cast<std::uint64_t>(j),
                                        spec_.a_spec.n_terms);
    ControlField g = stochastic_gradient(u, xi);
    sum = sum ? *sum + g : std::move(g);
  }
  return stationarity_measure(u, (1.0 / m) * *sum, prox_);
}

SemilinearProblem::Estimate SemilinearProblem::monitor(const ControlField& u, long n,
                                                       std::uint64_t seed,
                                                       std::uint64_t index_offset,
                                                       int threads) const {
  const int m = estimator_rule.batch_size(n);
  const std::uint64_t lane = sub_seed(seed, kLaneEstimator);
  std::vector<std::optional<PointSample>> slot(static_cast<std::size_t>(m));
  parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t j) {
    const SampleVector xi =
        draw_sample(lane, index_offset + static_cast<std::uint64_t>(j), spec_.a_spec.n_terms);
    slot[j] = sample(u, xi);
  });

  Estimate est;
  est.m = m;
  double j_acc = 0.0;
  std::optional<ControlField> g_sum;
  for (int j = 0; j < m; ++j) {
    PointSample& ps = *slot[static_cast<std::size_t>(j)];
    j_acc += ps.j_value;
    est.clamp_count += ps.clamp_count;
    g_sum = g_sum ? *g_sum + ps.gradient : std::move(ps.gradient);
  }
  est.f_hat = j_acc / m + spec_.lambda1 * norm_l1_p0(u);
  est.r_n = stationarity_measure(u, (1.0 / m) * *g_sum, prox_);
  return est;
}

ScalarFn make_scalar_descriptor(const std::string& name) {
  using std::numbers::pi;
  if (name == "zero") return [](double, double) { return 0.0; };
  if (name == "sin2pi-exp") {
    return [](double x1, double x2) {
      return std::sin(2 * pi * x1) * std::sin(2 * pi * x2) * std::exp(2 * x1) / 6.0;
    };
  }
  if (name == "sinpi") {
    return [](double x1, double x2) { return std::sin(pi * x1) * std::sin(pi * x2); };
  }
  if (name == "sin4pi") {
    return [](double x1, double x2) { return std::sin(4 * pi * x1) * std::sin(4 * pi * x2); };
  }
  if (name == "poisson") {
    // Forcing whose -Laplacian solution is sinpi.
    return [](double x1, double x2) {
      return 2.0 * pi * pi * std::sin(pi * x1) * std::sin(pi * x2);
    };
  }
  if (name.rfind("const:", 0) == 0) {
    const double c = std::stod(name.substr(6));
    return [c](double, double) { return c; };
  }
  throw std::invalid_argument("unknown scalar descriptor: " + name);
}

}  // namespace spg
