#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spgrad/fields.hpp"
#include "spgrad/parallel.hpp"
#include "spgrad/run_record.hpp"
#include "spgrad/schedules.hpp"

namespace spg {

/// Estimates computed at the current iterate from fresh samples.
struct MonitorResult {
  double f_hat = std::numeric_limits<double>::quiet_NaN();
  double r_n = std::numeric_limits<double>::quiet_NaN();
  int m = 0;
  long clamp_count = 0;
};

/// Callbacks defining a stochastic problem for the optimization loops. The
/// gradient receives a global sample index; sample generation is expected to
/// be a pure function of that index so batching and parallelism cannot
/// change results.
template <class Vec>
struct LoopProblem {
  std::function<Vec(const Vec&, std::uint64_t)> gradient;          // required
  std::function<MonitorResult(const Vec&, long)> monitor;          // optional
  std::function<double(long)> bias_bound;                          // optional K_n, only logged
  std::function<void(long, const Vec&)> on_iterate;                // optional, sees u_{n+1}
  std::function<void(const RunRow&)> on_row;                       // optional, streaming log
};

struct LoopOptions {
  long n_max = 100000;
  int stationarity_window = 50;  // r_hat spans window+1 consecutive r_n values
  int threads = 1;               // batch evaluations only; reduction order is fixed
  bool timing = false;           // when false, wall_ms is logged as 0
};

using TerminationRule = std::function<bool(const RunRecord&)>;

/// Stops once r_hat exists and is <= tol.
inline TerminationRule window_tolerance_rule(double tol) {
  return [tol](const RunRecord& rec) {
    return !rec.rows.empty() && rec.rows.back().r_hat && *rec.rows.back().r_hat <= tol;
  };
}

template <class Vec>
struct RunResult {
  RunRecord record;
  Vec u_final;
};

namespace detail {

class IterTimer {
 public:
  explicit IterTimer(bool enabled) : enabled_(enabled) {
    if (enabled_) start_ = std::chrono::steady_clock::now();
  }
  long elapsed_ms() const {
    if (!enabled_) return 0;
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

[[noreturn]] inline void rethrow_with_iteration(const char* loop, long n,
                                                const std::exception& e) {
  throw std::runtime_error(std::string(loop) + ": iteration " + std::to_string(n) + ": " +
                           e.what());
}

template <class Vec>
RunRow monitor_row(const LoopProblem<Vec>& problem, const Vec& u, long n, double t_n,
                   StationarityWindow& window) {
  RunRow row;
  row.n = n;
  row.t_n = t_n;
  if (problem.monitor) {
    const MonitorResult m = problem.monitor(u, n);
    row.f_hat = m.f_hat;
    row.r_n = m.r_n;
    row.m_n = m.m;
    row.clamp_count = m.clamp_count;
    row.r_hat = window.push(m.r_n);
  }
  return row;
}

template <class Vec>
void finalize(RunRecord& rec, const Vec& u, bool tolerance_reached) {
  rec.status = tolerance_reached ? "tolerance_reached" : "max_iters";
  rec.n_iters = rec.rows.empty() ? 0 : rec.rows.back().n;
  if (!rec.rows.empty()) rec.f_hat_final = rec.rows.back().f_hat;
  rec.max_abs_u_final = vec_max_abs(u);
}

/// Emits each logged row to the optional streaming sink exactly once.
class RowEmitter {
 public:
  explicit RowEmitter(const std::function<void(const RunRow&)>& sink) : sink_(sink) {}
  void emit(const RunRow& row) {
    if (sink_ && !emitted_) sink_(row);
    emitted_ = true;
  }
  bool pending(const RunRecord& rec, long n) const {
    return !emitted_ && !rec.rows.empty() && rec.rows.back().n == n;
  }

 private:
  const std::function<void(const RunRow&)>& sink_;
  bool emitted_ = false;
};

}  // namespace detail

/// Plain stochastic gradient loop u_{n+1} = u_n - t_n G(u_n, xi_n) for smooth
/// objectives (no prox). The schedule must satisfy Robbins-Monro.
template <class Vec>
RunResult<Vec> run_sgd(const LoopProblem<Vec>& problem, const StepSchedule& schedule, Vec u1,
                       const LoopOptions& opts = {}, const TerminationRule& stop = {}) {
  if (!validate_schedule(schedule).robbins_monro) {
    throw std::invalid_argument("run_sgd: step schedule fails the Robbins-Monro conditions");
  }
  RunRecord rec;
  Vec u = std::move(u1);
  bool hit_tol = false;
  StationarityWindow window(opts.stationarity_window);
  for (long n = 1; n <= opts.n_max; ++n) {
    const detail::IterTimer timer(opts.timing);
    const double t_n = schedule.step(n);
    detail::RowEmitter emitter(problem.on_row);
    try {
      RunRow row = detail::monitor_row(problem, u, n, t_n, window);
      if (problem.bias_bound) rec.bias_weighted_sum += t_n * problem.bias_bound(n);
      rec.rows.push_back(std::move(row));
      if (stop && stop(rec)) {
        emitter.emit(rec.rows.back());
        hit_tol = true;
        break;
      }
      const Vec g = problem.gradient(u, static_cast<std::uint64_t>(n));
      u = u - t_n * g;
      rec.rows.back().wall_ms = timer.elapsed_ms();
      emitter.emit(rec.rows.back());
      if (problem.on_iterate) problem.on_iterate(n, u);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      if (emitter.pending(rec, n)) emitter.emit(rec.rows.back());
      detail::rethrow_with_iteration("run_sgd", n, e);
    }
  }
  detail::finalize(rec, u, hit_tol);
  return {std::move(rec), std::move(u)};
}

/// Variance-reduced proximal loop with constant step 0 < t < 1/(2L) and a
/// batch schedule growing at least linearly:
///   u_{n+1} = prox_{t h}(u_n - t * mean_i G(u_n, xi_n^i)).
/// Batch members may be evaluated in parallel; the mean is reduced in index
/// order, so results do not depend on the thread count.
template <class Vec>
RunResult<Vec> run_vr_spg(const LoopProblem<Vec>& problem, double t_const, double lipschitz,
                          const BatchSchedule& batches,
                          const std::function<Vec(const Vec&, double)>& prox, Vec u1,
                          const LoopOptions& opts = {}, const TerminationRule& stop = {}) {
  if (!(t_const > 0.0) || !(t_const < 0.5 / lipschitz)) {
    throw std::invalid_argument("run_vr_spg: constant step must satisfy 0<t<1/(2L)");
  }
  if (!batches.grows_at_least_linearly()) {
    throw std::invalid_argument(
        "run_vr_spg: batch schedule must grow at least linearly (sum 1/m_n summability)");
  }
  RunRecord rec;
  Vec u = std::move(u1);
  bool hit_tol = false;
  StationarityWindow window(opts.stationarity_window);
  std::uint64_t cursor = 0;
  for (long n = 1; n <= opts.n_max; ++n) {
    const detail::IterTimer timer(opts.timing);
    detail::RowEmitter emitter(problem.on_row);
    try {
      RunRow row = detail::monitor_row(problem, u, n, t_const, window);
      if (problem.bias_bound) rec.bias_weighted_sum += t_const * problem.bias_bound(n);
      const int m = batches.size(n);
      row.m_n = m;
      rec.rows.push_back(std::move(row));
      if (stop && stop(rec)) {
        emitter.emit(rec.rows.back());
        hit_tol = true;
        break;
      }

      std::vector<std::optional<Vec>> slot(static_cast<std::size_t>(m));
      parallel_for(static_cast<std::size_t>(m), opts.threads, [&](std::size_t i) {
        slot[i] = problem.gradient(u, cursor + i);
      });
      cursor += static_cast<std::uint64_t>(m);
      Vec sum = std::move(*slot[0]);
      for (int i = 1; i < m; ++i) sum = sum + *slot[static_cast<std::size_t>(i)];
      const Vec g = (1.0 / m) * sum;

      u = prox(u - t_const * g, t_const);
      rec.rows.back().wall_ms = timer.elapsed_ms();
      emitter.emit(rec.rows.back());
      if (problem.on_iterate) problem.on_iterate(n, u);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      if (emitter.pending(rec, n)) emitter.emit(rec.rows.back());
      detail::rethrow_with_iteration("run_vr_spg", n, e);
    }
  }
  detail::finalize(rec, u, hit_tol);
  return {std::move(rec), std::move(u)};
}

/// Single-sample proximal loop with decreasing Robbins-Monro steps:
///   u_{n+1} = prox_{t_n h}(u_n - t_n G(u_n, xi_n)).
/// The monitor runs at u_n before the step; on termination the recorded
/// final iterate is the monitored one.
template <class Vec>
RunResult<Vec> run_spg_decreasing(const LoopProblem<Vec>& problem, const StepSchedule& schedule,
                                  const std::function<Vec(const Vec&, double)>& prox, Vec u1,
                                  const LoopOptions& opts = {},
                                  const TerminationRule& stop = {}) {
  if (!validate_schedule(schedule).robbins_monro) {
    throw std::invalid_argument(
        "run_spg_decreasing: step schedule fails the Robbins-Monro conditions");
  }
  RunRecord rec;
  Vec u = std::move(u1);
  bool hit_tol = false;
  StationarityWindow window(opts.stationarity_window);
  for (long n = 1; n <= opts.n_max; ++n) {
    const detail::IterTimer timer(opts.timing);
    const double t_n = schedule.step(n);
    detail::RowEmitter emitter(problem.on_row);
    try {
      RunRow row = detail::monitor_row(problem, u, n, t_n, window);
      if (problem.bias_bound) rec.bias_weighted_sum += t_n * problem.bias_bound(n);
      rec.rows.push_back(std::move(row));
      if (stop && stop(rec)) {
        emitter.emit(rec.rows.back());
        hit_tol = true;
        break;
      }
      const Vec g = problem.gradient(u, static_cast<std::uint64_t>(n));
      u = prox(u - t_n * g, t_n);
      rec.rows.back().wall_ms = timer.elapsed_ms();
      emitter.emit(rec.rows.back());
      if (problem.on_iterate) problem.on_iterate(n, u);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      if (emitter.pending(rec, n)) emitter.emit(rec.rows.back());
      detail::rethrow_with_iteration("run_spg_decreasing", n, e);
    }
  }
  detail::finalize(rec, u, hit_tol);
  return {std::move(rec), std::move(u)};
}

}  // namespace spg
