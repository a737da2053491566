#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spgrad/random_field.hpp"

using namespace spg;

TEST_CASE("build_spec: frozen eigenvalues and ordering at l = 0.5") {
  const KLFieldSpec spec = build_spec(0.5, 0.5, 20);
  REQUIRE(spec.eigenpairs.size() == 20);

  // Closed form evaluated to full precision beforehand.
  CHECK(spec.eigenpairs[0].lambda == doctest::Approx(0.051969894087690477).epsilon(1e-15));
  CHECK(spec.eigenpairs[0].j == 1);
  CHECK(spec.eigenpairs[0].k == 1);

  // Tie (1,2)/(2,1): equal eigenvalues, lexicographic order.
  CHECK(spec.eigenpairs[1].lambda == doctest::Approx(0.0049257182466542776).epsilon(1e-15));
  CHECK(spec.eigenpairs[1].j == 1);
  CHECK(spec.eigenpairs[1].k == 2);
  CHECK(spec.eigenpairs[2].j == 2);
  CHECK(spec.eigenpairs[2].k == 1);
  CHECK(spec.eigenpairs[1].lambda == spec.eigenpairs[2].lambda);

  for (std::size_t i = 0; i + 1 < spec.eigenpairs.size(); ++i) {
    CHECK(spec.eigenpairs[i].lambda >= spec.eigenpairs[i + 1].lambda);
    CHECK(spec.eigenpairs[i].lambda > 0.0);
  }
}

TEST_CASE("build_spec: m = 1 keeps only (1,1); bad input throws") {
  const KLFieldSpec spec = build_spec(0.5, 0.5, 1);
  REQUIRE(spec.eigenpairs.size() == 1);
  CHECK(spec.eigenpairs[0].j == 1);
  CHECK(spec.eigenpairs[0].k == 1);
  CHECK_THROWS_AS(build_spec(0.5, 0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(build_spec(0.5, 0.5, 0), std::invalid_argument);
}

TEST_CASE("draw_sample is a pure function of (seed, index)") {
  const SampleVector s1 = draw_sample(42, 7, 20);
  const SampleVector s2 = draw_sample(42, 7, 20);
  CHECK(s1.xi_a == s2.xi_a);
  CHECK(s1.xi_r == s2.xi_r);
  const SampleVector s3 = draw_sample(42, 8, 20);
  CHECK(s1.xi_a != s3.xi_a);
  const SampleVector s4 = draw_sample(43, 7, 20);
  CHECK(s1.xi_a != s4.xi_a);
}

TEST_CASE("draw_sample stays inside [-sqrt(0.5), sqrt(0.5)]") {
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const SampleVector s = draw_sample(1, i, 4);
    CHECK(s.xi_a.cwiseAbs().maxCoeff() <= kXiBound);
    CHECK(s.xi_r.cwiseAbs().maxCoeff() <= kXiBound);
  }
}

TEST_CASE("draw_sample moments match U(-sqrt(0.5), sqrt(0.5))") {
  const int n = 100000;
  const int m = 2;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(2 * m);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(2 * m);
  for (int i = 0; i < n; ++i) {
    const SampleVector s = draw_sample(7, static_cast<std::uint64_t>(i), m);
    for (int k = 0; k < m; ++k) {
      sum[k] += s.xi_a[k];
      sum[m + k] += s.xi_r[k];
      sum_sq[k] += s.xi_a[k] * s.xi_a[k];
      sum_sq[m + k] += s.xi_r[k] * s.xi_r[k];
    }
  }
  for (int k = 0; k < 2 * m; ++k) {
    const double mean = sum[k] / n;
    const double var = sum_sq[k] / n - mean * mean;
    CHECK(std::abs(mean) <= 0.01);
    CHECK(var == doctest::Approx(1.0 / 6.0).epsilon(0.05));
  }
}

TEST_CASE("distinct sample indices are statistically independent") {
  const int n = 100000;
  double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw_sample(11, static_cast<std::uint64_t>(i), 1).xi_a[0];
    const double y = draw_sample(11, static_cast<std::uint64_t>(i + 1), 1).xi_a[0];
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr =
      cov / std::sqrt((sxx / n - sx / n * (sx / n)) * (syy / n - sy / n * (sy / n)));
  CHECK(std::abs(corr) <= 0.02);
}

TEST_CASE("evaluate_field: mean at zero coordinates, series term otherwise") {
  const KLFieldSpec spec = build_spec(0.5, 0.5, 1);
  CHECK(evaluate_field(spec, Eigen::VectorXd::Zero(1), 0.3, 0.7) == 0.5);

  const double c = -0.42;
  Eigen::VectorXd coords(1);
  coords[0] = c;
  const double x1 = 0.2, x2 = 0.9;
  const double expect = 0.5 + std::sqrt(0.051969894087690477) * 2.0 *
                                  std::cos(std::numbers::pi * x2) *
                                  std::cos(std::numbers::pi * x1) * c;
  CHECK(evaluate_field(spec, coords, x1, x2) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("evaluate_field: odd-index cosines vanish at the center") {
  // First three eigenpairs are (1,1), (1,2), (2,1); all have an odd j or k,
  // so every term vanishes at x = (1/2, 1/2).
  const KLFieldSpec spec = build_spec(0.5, 0.5, 3);
  Eigen::VectorXd coords(3);
  coords << 0.6, -0.7, 0.2;
  CHECK(evaluate_field(spec, coords, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("evaluate_field is linear in the coordinates around the mean") {
  const KLFieldSpec spec = build_spec(0.25, 0.4, 6);
  rng::SplitMix64 gen{rng::stream_seed(5, 0)};
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd c(6);
    for (int i = 0; i < 6; ++i) c[i] = 2.0 * gen.uniform01() - 1.0;
    const double alpha = 4.0 * gen.uniform01() - 2.0;
    const double x1 = gen.uniform01();
    const double x2 = gen.uniform01();
    const double f_c = evaluate_field(spec, c, x1, x2) - spec.mean;
    const double f_ac = evaluate_field(spec, (alpha * c).eval(), x1, x2) - spec.mean;
    CHECK(f_ac == doctest::Approx(alpha * f_c).epsilon(1e-11));
  }
}

TEST_CASE("sub_seed separates lanes") {
  CHECK(sub_seed(1, kLanePath) != sub_seed(1, kLaneEstimator));
  CHECK(sub_seed(1, kLanePath) != sub_seed(2, kLanePath));
  const SampleVector path = draw_sample(sub_seed(9, kLanePath), 0, 3);
  const SampleVector est = draw_sample(sub_seed(9, kLaneEstimator), 0, 3);
  CHECK(path.xi_a != est.xi_a);
}
