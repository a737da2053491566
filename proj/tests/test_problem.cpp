#include <doctest.h>

#include <cmath>
#include <vector>

#include "spgrad/harness.hpp"
#include "spgrad/problem.hpp"

using namespace spg;

namespace {

ProblemSpec experiment_spec(const TriMesh& mesh, int kl_terms = 6) {
  ProblemSpec ps;
  ps.mesh = &mesh;
  ps.a_spec = build_spec(0.5, 0.5, kl_terms);
  ps.r_spec = build_spec(0.5, 0.5, kl_terms);
  ps.y_d = make_scalar_descriptor("sin2pi-exp");
  return ps;
}

// P1 evaluation on the uniform mesh (exact point location per cell half).
double p1_eval(const TriMesh& mesh, const StateField& y, double x1, double x2) {
  const int n = mesh.n_divisions;
  const int ix = std::min(static_cast<int>(x1 * n), n - 1);
  const int iy = std::min(static_cast<int>(x2 * n), n - 1);
  const double fx = x1 * n - ix;
  const double fy = x2 * n - iy;
  const int cell = iy * n + ix;
  const auto& tri = mesh.triangles[static_cast<std::size_t>(fy <= fx ? 2 * cell : 2 * cell + 1)];
  if (fy <= fx) {
    return (1.0 - fx) * y[tri[0]] + (fx - fy) * y[tri[1]] + fy * y[tri[2]];
  }
  return (1.0 - fy) * y[tri[0]] + fx * y[tri[1]] + (fy - fx) * y[tri[2]];
}

}  // namespace

TEST_CASE("objective at u = 0 is half the tracking norm of y_D") {
  const TriMesh mesh = build_mesh(16);
  SemilinearProblem problem(experiment_spec(mesh));
  const SampleVector xi = draw_sample(3, 5, 6);
  const double j0 = problem.objective_sample(ControlField::zero(mesh), xi);

  // Exactly the quadrature misfit of the zero state...
  const double expect =
      0.5 * tracking_misfit(problem.fem(), StateField::zero(mesh), problem.yd_react());
  CHECK(j0 == expect);
  // ... and close to the analytic (1/2)||y_D||^2 evaluated in closed form.
  CHECK(j0 == doctest::Approx(0.042245779519011559).epsilon(2e-4));
}

TEST_CASE("objective separates the lambda2 term") {
  const TriMesh mesh = build_mesh(8);
  SemilinearProblem problem(experiment_spec(mesh));
  const SampleVector xi = draw_sample(9, 2, 6);
  rng::SplitMix64 gen{rng::stream_seed(15, 0)};
  Eigen::VectorXd v(mesh.n_triangles());
  for (int i = 0; i < v.size(); ++i) v[i] = 0.5 * (2.0 * gen.uniform01() - 1.0);
  const ControlField u(mesh, std::move(v));

  ProblemSpec no_penalty = experiment_spec(mesh);
  no_penalty.lambda2 = 0.0;
  SemilinearProblem lean(no_penalty);
  const double with = problem.objective_sample(u, xi);
  const double without = lean.objective_sample(u, xi);
  CHECK(with - without ==
        doctest::Approx(0.5 * problem.spec().lambda2 * inner_l2_p0(u, u)).epsilon(1e-12));
}

TEST_CASE("perfect tracking: achievable target and lambda2 = 0 gives objective 0") {
  const TriMesh mesh = build_mesh(6);
  // Noise-free coefficients: evaluate the problem with zeroed coordinates.
  const int m = 4;
  ProblemSpec ps = experiment_spec(mesh, m);
  ps.lambda2 = 0.0;
  SemilinearProblem base(ps);

  SampleVector xi0;
  xi0.xi_a = Eigen::VectorXd::Zero(m);
  xi0.xi_r = Eigen::VectorXd::Zero(m);

  rng::SplitMix64 gen{rng::stream_seed(8, 0)};
  Eigen::VectorXd uv(mesh.n_triangles());
  for (int i = 0; i < uv.size(); ++i) uv[i] = 0.5 * (2.0 * gen.uniform01() - 1.0);
  const ControlField u_bar(mesh, std::move(uv));
  const auto [y_bar, rep] = solve_state(base.fem(), base.coefficients(xi0), u_bar);
  REQUIRE(rep.converged);

  // Feed the reached state back in as the target.
  ProblemSpec tracking = ps;
  tracking.y_d = [&mesh, y = y_bar](double x1, double x2) { return p1_eval(mesh, y, x1, x2); };
  SemilinearProblem reachable(tracking);
  CHECK(reachable.objective_sample(u_bar, xi0) <= 1e-18);
}

TEST_CASE("stochastic gradient at u = 0 with lambda2 = 0 is minus the projected adjoint") {
  const TriMesh mesh = build_mesh(8);
  ProblemSpec ps = experiment_spec(mesh);
  ps.lambda2 = 0.0;
  SemilinearProblem problem(ps);
  const SampleVector xi = draw_sample(21, 4, 6);

  const ControlField g = problem.stochastic_gradient(ControlField::zero(mesh), xi);
  const CoefficientSample coeffs = problem.coefficients(xi);
  const auto [y, rep] = solve_state(problem.fem(), coeffs, ControlField::zero(mesh));
  REQUIRE(rep.converged);
  CHECK(y.values().cwiseAbs().maxCoeff() == 0.0);
  const StateField p = solve_adjoint(problem.fem(), coeffs, y, problem.yd_react());
  const ControlField expect = -1.0 * project_p1_to_p0(mesh, p);
  CHECK(g.values() == expect.values());
}

TEST_CASE("gradient consistency: central differences match <G, v> (quick)") {
  RunConfig cfg;
  cfg.mesh_n = 8;
  cfg.kl_terms = 6;
  const auto res = cmd_check_gradient(cfg, 5);
  CHECK(res.exit_code == 0);
  CHECK(res.worst_rel_error <= 1e-4);
}

TEST_CASE("gradient fault injection is detected") {
  RunConfig cfg;
  cfg.mesh_n = 8;
  cfg.kl_terms = 6;
  const auto res = cmd_check_gradient(cfg, 5, /*inject_grad_fault=*/true);
  CHECK(res.exit_code != 0);
}

TEST_CASE("epsilon sweep shows the central-difference Taylor order, then the floor") {
  RunConfig cfg;
  cfg.mesh_n = 8;
  cfg.kl_terms = 6;
  // The objective is nearly quadratic in u (weak cubic state nonlinearity),
  // so truncation dominates only for large steps; below that the curve sits
  // on the solver-accuracy floor until roundoff takes over.
  const auto res = cmd_check_gradient(cfg, 10, false, {0.5, 0.1, 1e-4, 1e-5, 1e-8});
  const double e_half = res.sweep[0].second;
  const double e_tenth = res.sweep[1].second;
  CHECK(e_half / e_tenth >= 15.0);  // O(eps^2): factor 25 expected
  CHECK(e_half / e_tenth <= 40.0);
  CHECK(res.sweep[2].second <= 1e-4);  // flat floor at small eps
  CHECK(res.sweep[3].second <= 1e-4);
  CHECK(res.sweep[4].second >= res.sweep[3].second);  // cancellation regime
}

TEST_CASE("stochastic gradient norm and Lipschitz bounds") {
  const TriMesh mesh = build_mesh(8);
  SemilinearProblem problem(experiment_spec(mesh));
  const double lambda2 = problem.spec().lambda2;
  const double norm_yd =
      std::sqrt(tracking_misfit(problem.fem(), StateField::zero(mesh), problem.yd_react()));

  rng::SplitMix64 gen{rng::stream_seed(33, 0)};
  for (int inst = 0; inst < 20; ++inst) {
    Eigen::VectorXd v1(mesh.n_triangles()), v2(mesh.n_triangles());
    for (int i = 0; i < v1.size(); ++i) {
      v1[i] = 0.5 * (2.0 * gen.uniform01() - 1.0);
      v2[i] = 0.5 * (2.0 * gen.uniform01() - 1.0);
    }
    const ControlField u1(mesh, std::move(v1));
    const ControlField u2(mesh, std::move(v2));
    const SampleVector xi = draw_sample(77, static_cast<std::uint64_t>(inst), 6);
    const double c1 = kPoincareSqUnitSquare / problem.coefficients(xi).a_min();

    const ControlField g1 = problem.stochastic_gradient(u1, xi);
    CHECK(norm_l2_p0(g1) <=
          lambda2 * norm_l2_p0(u1) + c1 * norm_yd + c1 * c1 * norm_l2_p0(u1) + 1e-12);

    const ControlField g2 = problem.stochastic_gradient(u2, xi);
    CHECK(norm_l2_p0(g1 - g2) <= (lambda2 + c1 * c1) * norm_l2_p0(u1 - u2) + 1e-12);
  }
}

TEST_CASE("estimator rule: batch sizes and offsets") {
  const EstimatorRule rule;
  CHECK(rule.batch_size(1) == 1);
  CHECK(rule.batch_size(49) == 1);
  CHECK(rule.batch_size(50) == 11);
  CHECK(rule.batch_size(100) == 21);
  CHECK(rule.offset(1) == 0);
  CHECK(rule.offset(2) == 1);
  CHECK(rule.offset(51) == 49 + 11);  // 49 singleton batches, then m(50) = 11
  std::uint64_t acc = 0;
  for (long k = 1; k < 137; ++k) acc += static_cast<std::uint64_t>(rule.batch_size(k));
  CHECK(rule.offset(137) == acc);
}

TEST_CASE("estimate_objective: batch sizes follow the rule; eta vanishes at zero") {
  const TriMesh mesh = build_mesh(6);
  SemilinearProblem problem(experiment_spec(mesh));
  const ControlField zero = ControlField::zero(mesh);
  CHECK(problem.estimate_objective(zero, 1, 5).second == 1);
  CHECK(problem.estimate_objective(zero, 50, 5).second == 11);

  // eta(0) = 0: the estimate is the bare batch mean of J.
  ProblemSpec heavy = experiment_spec(mesh);
  heavy.lambda1 = 10.0;
  SemilinearProblem weighted(heavy);
  CHECK(weighted.estimate_objective(zero, 3, 5).first ==
        problem.estimate_objective(zero, 3, 5).first);
}

TEST_CASE("standalone estimators agree exactly with the combined monitor") {
  const TriMesh mesh = build_mesh(6);
  SemilinearProblem problem(experiment_spec(mesh));
  rng::SplitMix64 gen{rng::stream_seed(41, 0)};
  Eigen::VectorXd v(mesh.n_triangles());
  for (int i = 0; i < v.size(); ++i) v[i] = 0.4 * (2.0 * gen.uniform01() - 1.0);
  const ControlField u(mesh, std::move(v));

  const long n = 52;  // m = 11
  const std::uint64_t seed = 98765;
  const auto est = problem.monitor(u, n, seed, problem.estimator_rule.offset(n), 1);
  CHECK(est.m == 11);
  CHECK(problem.estimate_objective(u, n, seed).first == est.f_hat);
  CHECK(problem.estimate_stationarity(u, n, seed) == est.r_n);

  // Thread count cannot change the monitor output.
  const auto est3 = problem.monitor(u, n, seed, problem.estimator_rule.offset(n), 3);
  CHECK(est3.f_hat == est.f_hat);
  CHECK(est3.r_n == est.r_n);
}

TEST_CASE("objective estimator noise shrinks like 1/sqrt(m)") {
  const TriMesh mesh = build_mesh(6);
  SemilinearProblem problem(experiment_spec(mesh));
  const ControlField u = ControlField::constant(mesh, 0.2);

  const auto fhat_var = [&](long n_for_m, int reps, std::uint64_t seed0) {
    std::vector<double> vals;
    for (int r = 0; r < reps; ++r) {
      vals.push_back(problem.estimate_objective(u, n_for_m, seed0 + r).first);
    }
    double mu = 0.0;
    for (double x : vals) mu += x;
    mu /= vals.size();
    double var = 0.0;
    for (double x : vals) var += (x - mu) * (x - mu);
    return var / (vals.size() - 1);
  };
  const double v1 = fhat_var(1, 80, 100);     // m = 1
  const double v21 = fhat_var(100, 80, 900);  // m = 21
  const double ratio = v21 / v1;
  CHECK(ratio >= 1.0 / 42.0);  // 1/21 within a factor 2
  CHECK(ratio <= 2.0 / 21.0);
}

TEST_CASE("clamp fraction over 1e4 samples stays below 1e-3") {
  const TriMesh mesh = build_mesh(20);
  SemilinearProblem problem(experiment_spec(mesh, 20));
  long clamped = 0;
  long total = 0;
  const std::uint64_t lane = sub_seed(2024, kLaneEstimator);
  for (int s = 0; s < 10000; ++s) {
    const CoefficientSample cs =
        problem.coefficients(draw_sample(lane, static_cast<std::uint64_t>(s), 20));
    clamped += cs.clamp_count();
    total += cs.a_stiff.size() + cs.r_react.size();
  }
  CHECK(static_cast<double>(clamped) / static_cast<double>(total) < 1e-3);
}

TEST_CASE("Newton failure propagates out of objective evaluation") {
  const TriMesh mesh = build_mesh(6);
  ProblemSpec ps = experiment_spec(mesh);
  ps.newton.max_iters = 0;
  SemilinearProblem problem(ps);
  const SampleVector xi = draw_sample(1, 1, 6);
  CHECK_THROWS_AS(problem.objective_sample(ControlField::constant(mesh, 0.3), xi),
                  NewtonFailure);
}
