#include "spgrad/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace spg {

KLFieldSpec build_spec(double mean, double l, int m) {
  if (!(l > 0.0)) throw std::invalid_argument("build_spec: correlation length must be > 0");
  if (m < 1) throw std::invalid_argument("build_spec: n_terms must be >= 1");

  // Any pair in the m largest satisfies j,k <= m+1: the pairs (1,1)..(1,m+1)
  // alone give m+1 entries with j^2+k^2 < (m+2)^2+1, so enumerating the
  // (m+1)x(m+1) grid is sufficient.
  const int bound = m + 1;
  std::vector<KLEigenpair> pairs;
  pairs.reserve(static_cast<std::size_t>(bound) * bound);
  for (int j = 1; j <= bound; ++j) {
    for (int k = 1; k <= bound; ++k) {
      const double lambda =
          0.25 * std::exp(-std::numbers::pi * (j * j + k * k) * l * l);
      pairs.push_back({lambda, std::sqrt(lambda), j, k});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const KLEigenpair& a, const KLEigenpair& b) {
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    return std::tie(a.j, a.k) < std::tie(b.j, b.k);
  });
  pairs.resize(static_cast<std::size_t>(m));

  KLFieldSpec spec;
  spec.mean = mean;
  spec.correlation_length = l;
  spec.n_terms = m;
  spec.eigenpairs = std::move(pairs);
  return spec;
}

double evaluate_field(const KLFieldSpec& spec, const Eigen::VectorXd& coords,
                      double x1, double x2) {
  if (coords.size() != spec.n_terms) {
    throw std::invalid_argument("evaluate_field: coordinate count != n_terms");
  }
  double val = spec.mean;
  for (int i = 0; i < spec.n_terms; ++i) {
    const auto& ep = spec.eigenpairs[static_cast<std::size_t>(i)];
    const double phi = 2.0 * std::cos(ep.j * std::numbers::pi * x2) *
                       std::cos(ep.k * std::numbers::pi * x1);
    val += ep.sqrt_lambda * phi * coords[i];
  }
  return val;
}

namespace rng {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  // Index-th output of a SplitMix64 seeded from `seed`, computed in O(1).
  return mix64(mix64(seed + kGolden) + (index + 1) * kGolden);
}

std::uint64_t SplitMix64::next() {
  state += kGolden;
  return mix64(state);
}

double SplitMix64::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

}  // namespace rng

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t lane) {
  return rng::mix64(rng::mix64(seed) + lane * 0x9E3779B97F4A7C15ull);
}

SampleVector draw_sample(std::uint64_t seed, std::uint64_t index, int m) {
  if (m < 0) throw std::invalid_argument("draw_sample: m must be >= 0");
  rng::SplitMix64 gen{rng::stream_seed(seed, index)};
  SampleVector s;
  s.xi_a.resize(m);
  s.xi_r.resize(m);
  for (int i = 0; i < m; ++i) s.xi_a[i] = (2.0 * gen.uniform01() - 1.0) * kXiBound;
  for (int i = 0; i < m; ++i) s.xi_r[i] = (2.0 * gen.uniform01() - 1.0) * kXiBound;
  return s;
}

}  // namespace spg
