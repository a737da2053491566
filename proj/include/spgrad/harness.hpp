#pragma once

#include <string>
#include <vector>

#include "spgrad/config.hpp"
#include "spgrad/run_record.hpp"

namespace spg {

// Exit codes shared by the CLI and the command functions.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverFailure = 3;

struct SolveResult {
  int exit_code = kExitOk;
  RunRecord record;     // partial rows are also flushed to the CSV on failure
  double theta_used = 0.0;
  long path_clamps = 0;
  std::string error;
};

/// Runs the decreasing-step proximal method on the configured problem.
/// Writes the per-iteration CSV to out_csv (skipped when empty) streaming
/// row by row, so a solver failure leaves the completed rows on disk.
SolveResult cmd_solve(const RunConfig& cfg, const std::string& out_csv, bool quiet = true);

/// Final-control dump variant: additionally writes the terminal control as
/// (triangle,cx,cy,value) CSV when control_csv is non-empty.
SolveResult cmd_solve(const RunConfig& cfg, const std::string& out_csv,
                      const std::string& control_csv, bool quiet);

struct SweepRow {
  int mesh_n = 0;
  double h_hat = 0.0;
  int n_triangles = 0;
  double f_hat = 0.0;
  long n_iters = 0;
  bool ok = false;
  std::string error;
};

struct SweepResult {
  int exit_code = kExitOk;
  std::vector<SweepRow> rows;
};

/// One cmd_solve per mesh with a per-mesh seed sub-stream; emits the
/// mesh-independence table (h_hat, n_triangles, f_hat, n_iters).
SweepResult cmd_sweep_mesh(const RunConfig& cfg, const std::vector<int>& mesh_ns,
                           const std::string& out_csv, bool quiet = true);

struct GradientCheckResult {
  int exit_code = kExitOk;
  double worst_rel_error = 0.0;               // at the primary (first) epsilon
  std::vector<std::pair<double, double>> sweep;  // (epsilon, worst rel error)
};

/// Central finite differences of J against <G, v> on random (u, v, xi)
/// triples; directions are normalized smooth random trig fields. Exit is
/// nonzero if the worst relative error at the primary epsilon exceeds 1e-4.
/// inject_grad_fault perturbs lambda2 in G only (deliberate-bug detector).
GradientCheckResult cmd_check_gradient(const RunConfig& cfg, int trials,
                                       bool inject_grad_fault = false,
                                       std::vector<double> eps_list = {1e-5},
                                       bool quiet = true);

struct ProxCheckResult {
  int exit_code = kExitOk;
  double worst_abs_dev = 0.0;
};

/// Closed-form prox against brute-force scalar minimization (coarse grid +
/// golden-section refinement) on random (z, t) pairs; exit nonzero if any
/// deviation exceeds 1e-6.
ProxCheckResult cmd_check_prox(int n_pairs, std::uint64_t seed, double lambda1 = 0.008,
                               double box_lo = -0.5, double box_hi = 0.5, bool quiet = true);

/// Dumps one sampled KL field ("a" or "r", unclamped) at triangle centroids.
int cmd_sample_field(const RunConfig& cfg, const std::string& which, std::uint64_t sample_index,
                     const std::string& out_csv, bool quiet = true);

/// Independent scalar oracle used by the prox check: minimizes
/// lambda1 |v| + (1/2t)(v - z)^2 over [lo, hi] by grid search plus
/// golden-section refinement.
double brute_force_prox_scalar(double z, double t, double lambda1, double lo, double hi);

}  // namespace spg
