#include "spgrad/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace spg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out;
  in >> out;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw ConfigError("config: bad value for '" + key + "': " + value);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + value);
}

void validate(const RunConfig& c) {
  if (c.mesh_n < 1) throw ConfigError("config: mesh_n must be >= 1");
  if (c.kl_terms < 1) throw ConfigError("config: kl_terms must be >= 1");
  if (!(c.corr_len > 0)) throw ConfigError("config: corr_len must be > 0");
  if (c.lambda1 < 0 || c.lambda2 < 0) throw ConfigError("config: lambda1, lambda2 must be >= 0");
  if (!(c.box_lo <= c.box_hi)) throw ConfigError("config: box_lo must be <= box_hi");
  if (!(c.tol > 0)) throw ConfigError("config: tol must be > 0");
  if (c.window < 1) throw ConfigError("config: window must be >= 1");
  if (c.est_base < 1 || c.est_scale < 0 || c.est_period < 1) {
    throw ConfigError("config: estimator rule requires est_base >= 1, est_scale >= 0, est_period >= 1");
  }
  if (c.n_max < 0) throw ConfigError("config: n_max must be >= 0");
  if (c.threads < 1) throw ConfigError("config: threads must be >= 1");
  if (!(c.newton_tol > 0) || c.newton_max_iters < 0) {
    throw ConfigError("config: newton_tol must be > 0 and newton_max_iters >= 0");
  }
  if (!c.theta_auto && !(c.theta > 0)) throw ConfigError("config: theta must be > 0");
  if (!(c.alpha > 0.5 && c.alpha <= 1.0)) {
    throw ConfigError("config: alpha must satisfy 0.5 < alpha <= 1 (Robbins-Monro)");
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  const std::map<std::string, std::function<void(RunConfig&, const std::string&)>> setters = {
      {"mesh_n", [](RunConfig& c, const std::string& v) { c.mesh_n = parse_number<int>("mesh_n", v); }},
      {"a0", [](RunConfig& c, const std::string& v) { c.a0 = parse_number<double>("a0", v); }},
      {"r0", [](RunConfig& c, const std::string& v) { c.r0 = parse_number<double>("r0", v); }},
      {"corr_len", [](RunConfig& c, const std::string& v) { c.corr_len = parse_number<double>("corr_len", v); }},
      {"kl_terms", [](RunConfig& c, const std::string& v) { c.kl_terms = parse_number<int>("kl_terms", v); }},
      {"a_floor", [](RunConfig& c, const std::string& v) { c.a_floor = parse_number<double>("a_floor", v); }},
      {"lambda1", [](RunConfig& c, const std::string& v) { c.lambda1 = parse_number<double>("lambda1", v); }},
      {"lambda2", [](RunConfig& c, const std::string& v) { c.lambda2 = parse_number<double>("lambda2", v); }},
      {"box_lo", [](RunConfig& c, const std::string& v) { c.box_lo = parse_number<double>("box_lo", v); }},
      {"box_hi", [](RunConfig& c, const std::string& v) { c.box_hi = parse_number<double>("box_hi", v); }},
      {"y_d", [](RunConfig& c, const std::string& v) { c.y_d = v; }},
      {"theta", [](RunConfig& c, const std::string& v) { c.theta = parse_number<double>("theta", v); }},
      {"alpha", [](RunConfig& c, const std::string& v) { c.alpha = parse_number<double>("alpha", v); }},
      {"theta_auto", [](RunConfig& c, const std::string& v) { c.theta_auto = parse_bool("theta_auto", v); }},
      {"u1", [](RunConfig& c, const std::string& v) { c.u1 = v; }},
      {"n_max", [](RunConfig& c, const std::string& v) { c.n_max = parse_number<long>("n_max", v); }},
      {"tol", [](RunConfig& c, const std::string& v) { c.tol = parse_number<double>("tol", v); }},
      {"window", [](RunConfig& c, const std::string& v) { c.window = parse_number<int>("window", v); }},
      {"est_scale", [](RunConfig& c, const std::string& v) { c.est_scale = parse_number<int>("est_scale", v); }},
      {"est_period", [](RunConfig& c, const std::string& v) { c.est_period = parse_number<int>("est_period", v); }},
      {"est_base", [](RunConfig& c, const std::string& v) { c.est_base = parse_number<int>("est_base", v); }},
      {"newton_tol", [](RunConfig& c, const std::string& v) { c.newton_tol = parse_number<double>("newton_tol", v); }},
      {"newton_max_iters", [](RunConfig& c, const std::string& v) { c.newton_max_iters = parse_number<int>("newton_max_iters", v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
      {"threads", [](RunConfig& c, const std::string& v) { c.threads = parse_number<int>("threads", v); }},
      {"timing", [](RunConfig& c, const std::string& v) { c.timing = parse_bool("timing", v); }},
  };

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("config: line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second(cfg, value);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  if (path.empty()) return RunConfig{};
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace spg
