#include "spgrad/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>

#include "spgrad/algorithms.hpp"
#include "spgrad/fem.hpp"
#include "spgrad/problem.hpp"
#include "spgrad/prox.hpp"

namespace spg {

namespace {

constexpr std::uint64_t kLaneSweep = 0x100;      // per-mesh sub-streams: + mesh_n
constexpr std::uint64_t kLaneGradCheck = 0x200;  // gradient-check draws
constexpr std::uint64_t kLaneFieldDump = 0x300;  // sample-field draws

// Descriptor names come from the config file; surface bad ones as config
// errors (exit 2), not solver failures.
void validate_descriptors(const RunConfig& cfg) {
  try {
    make_scalar_descriptor(cfg.y_d);
    make_scalar_descriptor(cfg.u1);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ProblemSpec problem_spec_from_config(const RunConfig& cfg, const TriMesh& mesh) {
  ProblemSpec ps;
  ps.mesh = &mesh;
  ps.a_spec = build_spec(cfg.a0, cfg.corr_len, cfg.kl_terms);
  ps.r_spec = build_spec(cfg.r0, cfg.corr_len, cfg.kl_terms);
  ps.y_d = make_scalar_descriptor(cfg.y_d);
  ps.lambda1 = cfg.lambda1;
  ps.lambda2 = cfg.lambda2;
  ps.box = BoxSet(cfg.box_lo, cfg.box_hi);
  ps.a_floor = cfg.a_floor;
  ps.newton.tol = cfg.newton_tol;
  ps.newton.max_iters = cfg.newton_max_iters;
  return ps;
}

class CsvStream {
 public:
  explicit CsvStream(const std::string& path) {
    if (path.empty()) return;
    out_.emplace(path);
    if (!*out_) throw std::runtime_error("cannot open " + path);
    *out_ << RunRecord::csv_header() << '\n';
    out_->flush();
  }
  void row(const RunRow& r) {
    if (!out_) return;
    *out_ << format_csv_row(r) << '\n';
    out_->flush();
  }

 private:
  std::optional<std::ofstream> out_;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SolveResult cmd_solve(const RunConfig& cfg, const std::string& out_csv, bool quiet) {
  return cmd_solve(cfg, out_csv, std::string(), quiet);
}

SolveResult cmd_solve(const RunConfig& cfg, const std::string& out_csv,
                      const std::string& control_csv, bool quiet) {
  validate_descriptors(cfg);
  SolveResult result;
  try {
    const TriMesh mesh = build_mesh(cfg.mesh_n);
    SemilinearProblem problem(problem_spec_from_config(cfg, mesh));
    problem.estimator_rule =
        EstimatorRule{cfg.est_scale, cfg.est_period, cfg.est_base, cfg.window, cfg.tol};

    const ControlField u1 = project_to_p0(problem.fem(), make_scalar_descriptor(cfg.u1));
    const std::uint64_t path_lane = sub_seed(cfg.seed, kLanePath);
    const int m_terms = cfg.kl_terms;

    double theta = cfg.theta;
    if (cfg.theta_auto) {
      const ControlField g1 =
          problem.stochastic_gradient(u1, draw_sample(path_lane, 1, m_terms));
      const double gn = norm_l2_p0(g1);
      if (!(gn > 0.0)) throw std::runtime_error("theta_auto: ||G(u1, xi_1)|| is zero");
      theta = 1.0 / gn;
    }
    result.theta_used = theta;
    const StepSchedule schedule = StepSchedule::polynomial(theta, cfg.alpha);

    CsvStream csv(out_csv);
    const ProxSpec& prox = problem.prox_spec();
    std::uint64_t est_offset = 0;
    long path_clamps = 0;

    LoopProblem<ControlField> loop;
    loop.gradient = [&](const ControlField& u, std::uint64_t idx) {
      PointSample ps = problem.sample(u, draw_sample(path_lane, idx, m_terms));
      path_clamps += ps.clamp_count;
      return std::move(ps.gradient);
    };
    loop.monitor = [&](const ControlField& u, long n) {
      const SemilinearProblem::Estimate est =
          problem.monitor(u, n, cfg.seed, est_offset, cfg.threads);
      est_offset += static_cast<std::uint64_t>(est.m);
      return MonitorResult{est.f_hat, est.r_n, est.m, est.clamp_count};
    };
    loop.on_row = [&](const RunRow& r) { csv.row(r); };

    LoopOptions opts;
    opts.n_max = cfg.n_max;
    opts.stationarity_window = cfg.window;
    opts.threads = cfg.threads;
    opts.timing = cfg.timing;

    RunResult<ControlField> run = run_spg_decreasing<ControlField>(
        loop, schedule, [&](const ControlField& z, double t) { return prox_l1_box(z, t, prox); },
        u1, opts, window_tolerance_rule(cfg.tol));

    result.record = std::move(run.record);
    result.path_clamps = path_clamps;
    if (!control_csv.empty()) write_p0_csv(run.u_final, control_csv);
    if (!quiet) {
      std::printf("solve: status=%s n_iters=%ld f_hat=%s max_abs_u=%s theta=%s path_clamps=%ld\n",
                  result.record.status.c_str(), result.record.n_iters,
                  fmt(result.record.f_hat_final).c_str(),
                  fmt(result.record.max_abs_u_final).c_str(), fmt(theta).c_str(), path_clamps);
    }
  } catch (const ConfigError&) {
    throw;  // caller maps to exit 2
  } catch (const std::exception& e) {
    result.exit_code = kExitSolverFailure;
    result.error = e.what();
    result.record.status = "failed";
    if (!quiet) std::fprintf(stderr, "solve: failed: %s\n", e.what());
  }
  return result;
}

SweepResult cmd_sweep_mesh(const RunConfig& cfg, const std::vector<int>& mesh_ns,
                           const std::string& out_csv, bool quiet) {
  if (mesh_ns.empty()) throw ConfigError("sweep-mesh: empty mesh list");
  validate_descriptors(cfg);
  SweepResult result;
  for (int n : mesh_ns) {
    RunConfig row_cfg = cfg;
    row_cfg.mesh_n = n;
    row_cfg.seed = sub_seed(cfg.seed, kLaneSweep + static_cast<std::uint64_t>(n));
    SweepRow row;
    row.mesh_n = n;
    row.h_hat = std::sqrt(2.0) / n;
    row.n_triangles = 2 * n * n;
    const SolveResult solve = cmd_solve(row_cfg, std::string(), quiet);
    if (solve.exit_code == kExitOk) {
      row.ok = true;
      row.f_hat = solve.record.f_hat_final;
      row.n_iters = solve.record.n_iters;
    } else {
      row.error = solve.error;
      result.exit_code = kExitSolverFailure;
    }
    if (!quiet) {
      std::printf("sweep-mesh: N=%d triangles=%d %s\n", n, row.n_triangles,
                  row.ok ? ("n_iters=" + std::to_string(row.n_iters) + " f_hat=" + fmt(row.f_hat)).c_str()
                         : ("failed: " + row.error).c_str());
    }
    result.rows.push_back(std::move(row));
  }

  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) throw std::runtime_error("cannot open " + out_csv);
    out << "h_hat,n_triangles,f_hat,n_iters\n";
    for (const SweepRow& r : result.rows) {
      if (!r.ok) continue;
      out << fmt(r.h_hat) << ',' << r.n_triangles << ',' << fmt(r.f_hat) << ',' << r.n_iters
          << '\n';
    }
  }
  return result;
}

GradientCheckResult cmd_check_gradient(const RunConfig& cfg, int trials, bool inject_grad_fault,
                                       std::vector<double> eps_list, bool quiet) {
  if (trials < 1) throw ConfigError("check-gradient: trials must be >= 1");
  validate_descriptors(cfg);
  if (eps_list.empty()) eps_list = {1e-5};

  GradientCheckResult result;
  const TriMesh mesh = build_mesh(cfg.mesh_n);
  SemilinearProblem problem(problem_spec_from_config(cfg, mesh));
  const FemContext& fem = problem.fem();

  const std::uint64_t lane = sub_seed(cfg.seed, kLaneGradCheck);
  result.sweep.reserve(eps_list.size());
  std::vector<double> worst(eps_list.size(), 0.0);

  for (int trial = 0; trial < trials; ++trial) {
    rng::SplitMix64 gen{rng::stream_seed(lane, static_cast<std::uint64_t>(trial))};
    // Control uniform in the box.
    Eigen::VectorXd uv(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      uv[t] = cfg.box_lo + (cfg.box_hi - cfg.box_lo) * gen.uniform01();
    }
    const ControlField u(mesh, std::move(uv));

    // Smooth random direction: low-frequency sine combination, normalized.
    // White-noise directions make <G, v> ill-scaled relative to ||G|| ||v||.
    double c[3][3];
    for (auto& row : c) {
      for (double& x : row) x = 2.0 * gen.uniform01() - 1.0;
    }
    const ScalarFn vfn = [&c](double x1, double x2) {
      using std::numbers::pi;
      double acc = 0.0;
      for (int j = 1; j <= 3; ++j) {
        for (int k = 1; k <= 3; ++k) {
          acc += c[j - 1][k - 1] * std::sin(j * pi * x1) * std::sin(k * pi * x2);
        }
      }
      return acc;
    };
    ControlField v = project_to_p0(fem, vfn);
    v = (1.0 / norm_l2_p0(v)) * v;

    const SampleVector xi = draw_sample(lane, 0x10000 + static_cast<std::uint64_t>(trial),
                                        cfg.kl_terms);
    ControlField g = problem.stochastic_gradient(u, xi);
    if (inject_grad_fault) g = g + (0.05 * cfg.lambda2) * u;
    const double ip = inner_l2_p0(g, v);

    for (std::size_t e = 0; e < eps_list.size(); ++e) {
      const double eps = eps_list[e];
      const double jp = problem.objective_sample(u + eps * v, xi);
      const double jm = problem.objective_sample(u - eps * v, xi);
      const double fd = (jp - jm) / (2.0 * eps);
      const double rel = std::abs(fd - ip) / std::max(std::abs(ip), 1e-300);
      worst[e] = std::max(worst[e], rel);
    }
  }

  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    result.sweep.emplace_back(eps_list[e], worst[e]);
    if (!quiet) {
      std::printf("check-gradient: eps=%g worst_rel_error=%g\n", eps_list[e], worst[e]);
    }
  }
  result.worst_rel_error = worst[0];
  result.exit_code = worst[0] <= 1e-4 ? kExitOk : 1;
  if (!quiet) {
    std::printf("check-gradient: %s (worst %g at eps=%g over %d trials)\n",
                result.exit_code == 0 ? "PASS" : "FAIL", worst[0], eps_list[0], trials);
  }
  return result;
}

double brute_force_prox_scalar(double z, double t, double lambda1, double lo, double hi) {
  const auto cost = [&](double v) {
    return lambda1 * std::abs(v) + (v - z) * (v - z) / (2.0 * t);
  };
  // Coarse grid, then golden-section refinement around the best cell.
  const int grid = 4000;
  double best_v = lo;
  double best_c = cost(lo);
  for (int i = 1; i <= grid; ++i) {
    const double v = lo + (hi - lo) * i / grid;
    const double c = cost(v);
    if (c < best_c) {
      best_c = c;
      best_v = v;
    }
  }
  const double cell = (hi - lo) / grid;
  double a = std::max(lo, best_v - 2.0 * cell);
  double b = std::min(hi, best_v + 2.0 * cell);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = cost(x1);
  double f2 = cost(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = cost(x2);
    }
  }
  return 0.5 * (a + b);
}

ProxCheckResult cmd_check_prox(int n_pairs, std::uint64_t seed, double lambda1, double box_lo,
                               double box_hi, bool quiet) {
  if (n_pairs < 1) throw ConfigError("check-prox: pairs must be >= 1");
  ProxCheckResult result;
  rng::SplitMix64 gen{rng::stream_seed(seed, 0)};
  for (int i = 0; i < n_pairs; ++i) {
    const double z = 4.0 * gen.uniform01() - 2.0;
    const double t = std::pow(10.0, 4.0 * gen.uniform01() - 2.0);  // log-uniform [1e-2, 1e2]
    const double closed = prox_scalar(z, t, lambda1, box_lo, box_hi);
    const double brute = brute_force_prox_scalar(z, t, lambda1, box_lo, box_hi);
    result.worst_abs_dev = std::max(result.worst_abs_dev, std::abs(closed - brute));
  }
  result.exit_code = result.worst_abs_dev <= 1e-6 ? kExitOk : 1;
  if (!quiet) {
    std::printf("check-prox: %s (worst |closed - brute| = %g over %d pairs)\n",
                result.exit_code == 0 ? "PASS" : "FAIL", result.worst_abs_dev, n_pairs);
  }
  return result;
}

int cmd_sample_field(const RunConfig& cfg, const std::string& which, std::uint64_t sample_index,
                     const std::string& out_csv, bool quiet) {
  if (which != "a" && which != "r") throw ConfigError("sample-field: field must be 'a' or 'r'");
  const TriMesh mesh = build_mesh(cfg.mesh_n);
  const bool is_a = which == "a";
  const KLFieldSpec spec = build_spec(is_a ? cfg.a0 : cfg.r0, cfg.corr_len, cfg.kl_terms);
  const SampleVector xi =
      draw_sample(sub_seed(cfg.seed, kLaneFieldDump), sample_index, cfg.kl_terms);
  const Eigen::VectorXd& coords = is_a ? xi.xi_a : xi.xi_r;

  Eigen::VectorXd vals(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Eigen::Vector2d c = mesh.centroid(t);
    vals[t] = evaluate_field(spec, coords, c.x(), c.y());
  }
  write_p0_csv(ControlField(mesh, std::move(vals)), out_csv);
  if (!quiet) {
    std::printf("sample-field: wrote %s field (sample %llu) to %s\n", which.c_str(),
                static_cast<unsigned long long>(sample_index), out_csv.c_str());
  }
  return kExitOk;
}

}  // namespace spg
