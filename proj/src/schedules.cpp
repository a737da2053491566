#include "spgrad/schedules.hpp"

#include <stdexcept>

namespace spg {

ScheduleDiagnostics validate_schedule(const StepSchedule& s) {
  ScheduleDiagnostics d;
  if (s.kind == StepSchedule::Kind::constant) {
    if (s.t_const > 0.0) {
      d.usable_constant_step = true;
      d.failure = ScheduleFailure::sum_squares_infinite;
      d.message = "constant steps: sum t_n^2 = inf (not Robbins-Monro; usable with 0 < t < 1/(2L))";
    } else {
      d.failure = ScheduleFailure::theta_nonpositive;
      d.message = "constant steps require t > 0";
    }
    return d;
  }
  if (!(s.theta > 0.0)) {
    d.failure = ScheduleFailure::theta_nonpositive;
    d.message = "polynomial steps require theta > 0";
    return d;
  }
  if (s.alpha > 1.0) {
    d.failure = ScheduleFailure::sum_steps_finite;
    d.message = "sum t_n < inf: alpha > 1 violates the divergence condition";
    return d;
  }
  if (s.alpha <= 0.5) {
    d.failure = ScheduleFailure::sum_squares_infinite;
    d.message = "sum t_n^2 = inf: alpha <= 1/2 violates the square-summability condition";
    return d;
  }
  d.robbins_monro = true;
  d.message = "ok: 0.5 < alpha <= 1, theta > 0";
  return d;
}

BatchSchedule BatchSchedule::fixed(int m) {
  if (m < 1) throw std::invalid_argument("BatchSchedule: m must be >= 1");
  BatchSchedule b;
  b.kind = Kind::fixed;
  b.m_fixed = m;
  return b;
}

BatchSchedule BatchSchedule::growth(double base, double slope, double power) {
  if (slope < 0.0 || power < 0.0) throw std::invalid_argument("BatchSchedule: bad growth parameters");
  BatchSchedule b;
  b.kind = Kind::growth;
  b.base = base;
  b.slope = slope;
  b.power = power;
  return b;
}

int BatchSchedule::size(long n) const {
  if (kind == Kind::fixed) return m_fixed;
  const double m = std::ceil(base + slope * std::pow(static_cast<double>(n), power));
  return m < 1.0 ? 1 : static_cast<int>(m);
}

}  // namespace spg
