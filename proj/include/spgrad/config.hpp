#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Experiment configuration. The defaults are the reference experiment: an empty
/// config file (or none at all) runs the full problem on the 9800-triangle
/// mesh. File format is flat `key = value` lines with `#` comments; see the
/// README for the key list.
struct RunConfig {
  int mesh_n = 70;

  // Random fields.
  double a0 = 0.5;
  double r0 = 0.5;
  double corr_len = 0.5;
  int kl_terms = 20;
  double a_floor = 1e-3;

  // Objective.
  double lambda1 = 0.008;
  double lambda2 = 0.001;
  double box_lo = -0.5;
  double box_hi = 0.5;
  std::string y_d = "sin2pi-exp";

  // Algorithm.
  double theta = 100.0;
  double alpha = 1.0;
  bool theta_auto = false;  // theta = 1 / ||G(u1, xi_1)|| when set
  std::string u1 = "sin4pi";
  long n_max = 100000;

  // Monitoring and termination.
  double tol = 2e-4;
  int window = 50;
  int est_scale = 10;
  int est_period = 50;
  int est_base = 1;

  // Solvers.
  double newton_tol = 1e-10;
  int newton_max_iters = 30;

  // Execution.
  std::uint64_t seed = 1;
  int threads = 1;
  bool timing = false;  // measured wall_ms breaks bit-reproducibility; off by default
};

/// Parses `key = value` text. Unknown keys and malformed values throw
/// ConfigError.
RunConfig parse_config_text(const std::string& text);

/// Loads a config file; an empty path yields the defaults.
RunConfig load_config_file(const std::string& path);

}  // namespace spg
