#pragma once

#include <cmath>
#include <string>

namespace spg {

/// Step-size schedule: either constant t_n = t_const, or polynomial
/// t_n = theta / (n + shift)^alpha. The polynomial schedule with
/// 0.5 < alpha <= 1 satisfies the Robbins-Monro conditions
/// sum t_n = inf, sum t_n^2 < inf.
struct StepSchedule {
  enum class Kind { constant, polynomial };
  Kind kind = Kind::polynomial;
  double theta = 100.0;
  double alpha = 1.0;
  int shift = 0;  // t_n = theta / (n + shift)^alpha
  double t_const = 0.0;

  static StepSchedule polynomial(double theta, double alpha, int shift = 0) {
    return {Kind::polynomial, theta, alpha, shift, 0.0};
  }
  static StepSchedule constant(double t) { return {Kind::constant, 0.0, 0.0, 0, t}; }

  double step(long n) const {
    if (kind == Kind::constant) return t_const;
    return theta / std::pow(static_cast<double>(n + shift), alpha);
  }
};

/// Named outcome of the Robbins-Monro validation.
enum class ScheduleFailure {
  none,
  theta_nonpositive,     // theta <= 0 (or t_const <= 0)
  sum_steps_finite,      // sum t_n < inf fails the divergence condition (alpha > 1)
  sum_squares_infinite,  // sum t_n^2 = inf (alpha <= 1/2, or constant steps)
};

struct ScheduleDiagnostics {
  bool robbins_monro = false;       // polynomial with 0.5 < alpha <= 1 and theta > 0
  bool usable_constant_step = false;  // constant t > 0 (Algorithm 2 additionally needs t < 1/(2L))
  ScheduleFailure failure = ScheduleFailure::none;  // why robbins_monro is false
  std::string message;
};

/// Checks the Robbins-Monro conditions; constant schedules are reported as
/// usable for the constant-step method but never Robbins-Monro.
ScheduleDiagnostics validate_schedule(const StepSchedule& s);

/// Sample-count schedule per iteration: fixed m, or growing
/// m(n) = ceil(base + slope * n^power), power >= 1.
struct BatchSchedule {
  enum class Kind { fixed, growth };
  Kind kind = Kind::fixed;
  int m_fixed = 1;
  double base = 1.0;
  double slope = 0.0;
  double power = 1.0;

  static BatchSchedule fixed(int m);
  static BatchSchedule growth(double base, double slope, double power = 1.0);

  int size(long n) const;

  /// Growing at least linearly (slope > 0, power >= 1), the admission rule
  /// for the variance-reduced method's summability requirement.
  bool grows_at_least_linearly() const {
    return kind == Kind::growth && slope > 0.0 && power >= 1.0;
  }
};

}  // namespace spg
