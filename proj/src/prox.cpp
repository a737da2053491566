#include "spgrad/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spg {

ProxSpec ProxSpec::l1_box(double lambda1, BoxSet box) {
  if (!(lambda1 >= 0.0)) throw std::invalid_argument("ProxSpec: lambda1 must be >= 0");
  return {ProxVariant::l1_box, lambda1, std::move(box)};
}

ProxSpec ProxSpec::box_only(BoxSet box) { return {ProxVariant::box_only, 0.0, std::move(box)}; }

ProxSpec ProxSpec::l1_only(double lambda1) {
  if (!(lambda1 >= 0.0)) throw std::invalid_argument("ProxSpec: lambda1 must be >= 0");
  return {ProxVariant::l1_only, lambda1, BoxSet::unbounded()};
}

ProxSpec ProxSpec::none() { return {ProxVariant::none, 0.0, BoxSet::unbounded()}; }

double ProxSpec::h_value(const ControlField& u) const {
  const bool has_box = variant == ProxVariant::l1_box || variant == ProxVariant::box_only;
  if (has_box && !box.contains(u)) return std::numeric_limits<double>::infinity();
  const bool has_l1 = variant == ProxVariant::l1_box || variant == ProxVariant::l1_only;
  return has_l1 ? lambda1 * norm_l1_p0(u) : 0.0;
}

double prox_scalar(double z, double t, double lambda1, double lo, double hi) {
  const double shrunk = std::max(std::abs(z) - t * lambda1, 0.0) * (z < 0.0 ? -1.0 : 1.0);
  return std::min(std::max(shrunk, lo), hi);
}

ControlField prox_l1_box(const ControlField& z, double t, const ProxSpec& spec) {
  if (!(t > 0.0)) throw std::invalid_argument("prox_l1_box: t must be > 0");
  const bool has_box = spec.variant == ProxVariant::l1_box || spec.variant == ProxVariant::box_only;
  const bool has_l1 = spec.variant == ProxVariant::l1_box || spec.variant == ProxVariant::l1_only;
  const double lam = has_l1 ? spec.lambda1 : 0.0;
  const double inf = std::numeric_limits<double>::infinity();

  Eigen::VectorXd out(z.size());
  for (int i = 0; i < z.size(); ++i) {
    const double lo = has_box ? spec.box.lo(i) : -inf;
    const double hi = has_box ? spec.box.hi(i) : inf;
    out[i] = prox_scalar(z[i], t, lam, lo, hi);
  }
  return ControlField(z.mesh(), std::move(out));
}

double stationarity_measure(const ControlField& u, const ControlField& g_avg,
                            const ProxSpec& spec) {
  return norm_l2_p0(u - prox_l1_box(u - g_avg, 1.0, spec));
}

}  // namespace spg
