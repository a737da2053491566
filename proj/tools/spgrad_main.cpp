#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spgrad/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out = "run.csv";
  bool quiet = false;
  // Optional overrides, applied after the config file.
  std::optional<std::uint64_t> seed;
  std::optional<int> mesh_n;
  std::optional<long> n_max;
  std::optional<int> threads;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_out = true) {
  cmd->add_option("--config", args.config_path, "Config file (key = value lines)");
  if (with_out) cmd->add_option("--out", args.out, "Output CSV path");
  cmd->add_flag("--quiet", args.quiet, "Suppress progress output");
  cmd->add_option("--seed", args.seed, "Override seed");
  cmd->add_option("--mesh-n", args.mesh_n, "Override mesh subdivisions N");
  cmd->add_option("--n-max", args.n_max, "Override iteration cap");
  cmd->add_option("--threads", args.threads, "Override batch-evaluation threads");
  cmd->add_flag("--timing", args.timing, "Measure per-iteration wall_ms (breaks byte reproducibility)");
}

spg::RunConfig resolve_config(const CommonArgs& args) {
  spg::RunConfig cfg = spg::load_config_file(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.mesh_n) cfg.mesh_n = *args.mesh_n;
  if (args.n_max) cfg.n_max = *args.n_max;
  if (args.threads) cfg.threads = *args.threads;
  if (args.timing) cfg.timing = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic proximal gradient methods for a semilinear control problem under uncertainty"};
  app.require_subcommand(1);

  CommonArgs solve_args;
  std::string control_out;
  CLI::App* solve = app.add_subcommand("solve", "Run the decreasing-step proximal method");
  add_common(solve, solve_args);
  solve->add_option("--control-out", control_out, "Write the final control as CSV");

  CommonArgs sweep_args;
  std::vector<int> mesh_list = {20, 30, 40, 50, 60, 70};
  CLI::App* sweep = app.add_subcommand("sweep-mesh", "Mesh-independence sweep");
  add_common(sweep, sweep_args);
  sweep->add_option("--n-list", mesh_list, "Mesh subdivisions to run");

  CommonArgs grad_args;
  int trials = 10;
  bool inject_fault = false;
  std::vector<double> eps_list = {1e-5};
  CLI::App* grad = app.add_subcommand("check-gradient", "Finite-difference gradient check");
  add_common(grad, grad_args, /*with_out=*/false);
  grad->add_option("--trials", trials, "Random (u, v, xi) triples");
  grad->add_option("--eps", eps_list, "Central-difference step(s)");
  grad->add_flag("--inject-grad-fault", inject_fault, "Perturb lambda2 in G only (must fail)");

  CommonArgs prox_args;
  int pairs = 1000;
  CLI::App* prox = app.add_subcommand("check-prox", "Closed-form prox vs brute-force oracle");
  add_common(prox, prox_args, /*with_out=*/false);
  prox->add_option("--pairs", pairs, "Random (z, t) pairs");

  CommonArgs field_args;
  std::string field = "a";
  std::uint64_t sample_index = 0;
  CLI::App* dump = app.add_subcommand("sample-field", "Dump one sampled KL field to CSV");
  add_common(dump, field_args);
  dump->add_option("--field", field, "Which field: a or r");
  dump->add_option("--sample-index", sample_index, "Sample index within the dump stream");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return spg::kExitConfigError;
  }

  try {
    if (solve->parsed()) {
      const spg::RunConfig cfg = resolve_config(solve_args);
      return spg::cmd_solve(cfg, solve_args.out, control_out, solve_args.quiet).exit_code;
    }
    if (sweep->parsed()) {
      const spg::RunConfig cfg = resolve_config(sweep_args);
      return spg::cmd_sweep_mesh(cfg, mesh_list, sweep_args.out, sweep_args.quiet).exit_code;
    }
    if (grad->parsed()) {
      const spg::RunConfig cfg = resolve_config(grad_args);
      return spg::cmd_check_gradient(cfg, trials, inject_fault, eps_list, grad_args.quiet)
          .exit_code;
    }
    if (prox->parsed()) {
      const spg::RunConfig cfg = resolve_config(prox_args);
      return spg::cmd_check_prox(pairs, cfg.seed, cfg.lambda1, cfg.box_lo, cfg.box_hi,
                                 prox_args.quiet)
          .exit_code;
    }
    if (dump->parsed()) {
      const spg::RunConfig cfg = resolve_config(field_args);
      return spg::cmd_sample_field(cfg, field, sample_index, field_args.out, field_args.quiet);
    }
  } catch (const spg::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return spg::kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return spg::kExitSolverFailure;
  }
  return 0;
}
