#include "spgrad/run_record.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace spg {

const char* RunRecord::csv_header() { return "n,t_n,m_n,f_hat,r_n,r_hat,clamp_count,wall_ms"; }

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string format_csv_row(const RunRow& r) {
  std::string line = std::to_string(r.n);
  line += ',';
  line += fmt17(r.t_n);
  line += ',';
  line += std::to_string(r.m_n);
  line += ',';
  line += fmt17(r.f_hat);
  line += ',';
  line += fmt17(r.r_n);
  line += ',';
  if (r.r_hat) line += fmt17(*r.r_hat);
  line += ',';
  line += std::to_string(r.clamp_count);
  line += ',';
  line += std::to_string(r.wall_ms);
  return line;
}

void RunRecord::write_csv(std::ostream& out) const {
  out << csv_header() << '\n';
  for (const RunRow& r : rows) out << format_csv_row(r) << '\n';
}

void RunRecord::write_csv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("RunRecord: cannot open " + path);
  write_csv(out);
}

std::optional<double> StationarityWindow::push(double r) {
  if (!std::isfinite(r)) {
    values_.clear();
    return std::nullopt;
  }
  values_.push_back(r);
  const std::size_t need = static_cast<std::size_t>(window_) + 1;
  if (values_.size() > need) values_.erase(values_.begin());
  if (values_.size() < need) return std::nullopt;
  // Fresh ascending-order accumulation each time: deterministic and
  // recomputable exactly from the CSV r_n column.
  double acc = 0.0;
  for (double v : values_) acc += v;
  return acc / static_cast<double>(need);
}

}  // namespace spg
