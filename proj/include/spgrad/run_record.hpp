#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace spg {

/// One logged iteration. r_hat is present once a full stationarity window
/// (window + 1 consecutive r_n values) exists.
struct RunRow {
  long n = 0;
  double t_n = 0.0;
  int m_n = 0;
  double f_hat = std::numeric_limits<double>::quiet_NaN();
  double r_n = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> r_hat;
  long clamp_count = 0;
  long wall_ms = 0;
};

/// Per-run log backing the CSV output and the termination rule.
struct RunRecord {
  std::vector<RunRow> rows;

  // Final summary.
  long n_iters = 0;
  double f_hat_final = std::numeric_limits<double>::quiet_NaN();
  double max_abs_u_final = std::numeric_limits<double>::quiet_NaN();
  double bias_weighted_sum = 0.0;  // sum t_n K_n when a bias bound is declared
  std::string status = "ok";       // ok | tolerance_reached | max_iters

  /// Appends the CSV header and one line per row; floats carry 17
  /// significant digits so round-trips are lossless.
  void write_csv(std::ostream& out) const;
  void write_csv_file(const std::string& path) const;

  static const char* csv_header();  // "n,t_n,m_n,f_hat,r_n,r_hat,clamp_count,wall_ms"
};

/// One CSV line (no newline), identical to what RunRecord::write_csv emits.
std::string format_csv_row(const RunRow& row);

/// Rolling mean of the last (window + 1) stationarity values; yields a value
/// only once the window is full. The mean (not the raw sum) is the smoothed
/// stationarity estimate the termination tolerance is compared against.
class StationarityWindow {
 public:
  explicit StationarityWindow(int window) : window_(window) {}

  std::optional<double> push(double r);

 private:
  int window_;
  std::vector<double> values_;
};

}  // namespace spg
