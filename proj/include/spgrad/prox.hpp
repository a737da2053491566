#pragma once

#include "spgrad/fields.hpp"

namespace spg {

enum class ProxVariant { l1_box, box_only, l1_only, none };

/// Nonsmooth term h(u) = lambda1 ||u||_L1 + indicator of the box, or the
/// degenerate variants with one (or both) parts absent.
struct ProxSpec {
  ProxVariant variant = ProxVariant::none;
  double lambda1 = 0.0;
  BoxSet box = BoxSet::unbounded();

  static ProxSpec l1_box(double lambda1, BoxSet box);
  static ProxSpec box_only(BoxSet box);
  static ProxSpec l1_only(double lambda1);
  static ProxSpec none();

  /// h(u); +infinity outside the box.
  double h_value(const ControlField& u) const;
};

/// prox_{t h}(z): elementwise soft-threshold by t*lambda1 toward zero, then
/// clamp into the box. Exact for the mass-weighted geometry because both
/// terms of h carry the same per-cell weight |T|. The dead zone is closed:
/// |z_T| = t*lambda1 maps to 0.
ControlField prox_l1_box(const ControlField& z, double t, const ProxSpec& spec);

/// Scalar version: argmin_v lambda1 |v| + (1/2t)(v - z)^2 + indicator[lo, hi].
double prox_scalar(double z, double t, double lambda1, double lo, double hi);

/// Stationarity measure r = || u - prox_h(u - g_avg) || in the L2(D) norm;
/// unit prox step, matching the monitoring formula that omits t_n.
double stationarity_measure(const ControlField& u, const ControlField& g_avg,
                            const ProxSpec& spec);

}  // namespace spg
