#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace spg {

/// One term of the Karhunen-Loeve expansion: eigenvalue and the (j,k) index
/// of the eigenfunction phi_{j,k}(x) = 2 cos(j pi x2) cos(k pi x1).
struct KLEigenpair {
  double lambda;
  double sqrt_lambda;
  int j;
  int k;
};

/// Truncated KL expansion of a random field on the unit square:
///   field(x, xi) = mean + sum_i sqrt(lambda_i) phi_i(x) xi_i,
/// with lambda_{j,k} = (1/4) exp(-pi (j^2 + k^2) l^2). Eigenpairs are sorted
/// by descending eigenvalue; ties broken lexicographically by (j,k).
struct KLFieldSpec {
  double mean = 0.0;
  double correlation_length = 0.0;
  int n_terms = 0;
  std::vector<KLEigenpair> eigenpairs;
};

/// Enumerates eigenpairs for correlation length l > 0 and truncates to the
/// m >= 1 largest.
KLFieldSpec build_spec(double mean, double l, int m);

/// Evaluates the KL field at a single point for the given coordinates xi.
double evaluate_field(const KLFieldSpec& spec, const Eigen::VectorXd& coords,
                      double x1, double x2);

/// Half-width of the coordinate distribution U(-sqrt(0.5), sqrt(0.5)).
inline const double kXiBound = 0.70710678118654752;

/// Coordinates for one joint sample of the diffusion and reaction fields.
struct SampleVector {
  Eigen::VectorXd xi_a;
  Eigen::VectorXd xi_r;
};

// Counter-based sampling: every value is a pure function of (seed, index),
// so parallel or out-of-order generation cannot change results. Streams are
// derived with the SplitMix64 finalizer; each sample index owns a SplitMix64
// stream producing its 2m uniforms.

/// Derives an independent seed for a named sub-stream (lane) of a base seed.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t lane);

/// Stream lanes used by the harness.
inline constexpr std::uint64_t kLanePath = 1;       // optimization-path samples
inline constexpr std::uint64_t kLaneEstimator = 2;  // monitoring estimators

/// Draws sample number `index` of the stream `seed`: 2m i.i.d. uniforms on
/// [-sqrt(0.5), sqrt(0.5)], split into (xi_a, xi_r).
SampleVector draw_sample(std::uint64_t seed, std::uint64_t index, int m);

namespace rng {

/// SplitMix64 output function (Stafford mix13 finalizer).
std::uint64_t mix64(std::uint64_t z);

/// Deterministic per-index stream seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

/// SplitMix64 generator; uniform01 maps the top 53 bits into [0,1).
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next();
  double uniform01();
};

}  // namespace rng

}  // namespace spg
