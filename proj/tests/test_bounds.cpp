#include <gtest/gtest.h>

#include <random>

#include "densecap/bounds.hpp"
#include "densecap/error.hpp"

namespace densecap {
namespace {

Real50 as_real(const Rational& r) {
  return Real50(numerator(r)) / Real50(denominator(r));
}

void expect_consistent(const BoundValue& v) {
  if (v.exact) {
    const Real50 direct = log2(Real50(*v.exact));
    EXPECT_LT(abs(direct - v.log2), Real50(1e-9)) << v.formula_id;
  }
  if (v.log2_exact) EXPECT_LT(abs(as_real(*v.log2_exact) - v.log2), Real50(1e-9));
}

TEST(Bounds, LipschitzConstant) {
  EXPECT_EQ(lipschitz_constant(4, 2).exact_text(), "64");
  EXPECT_EQ(lipschitz_constant(1, 1).exact_text(), "2");
  const BoundValue big = lipschitz_constant(8, 10);
  ASSERT_TRUE(big.log2_exact);
  EXPECT_EQ(*big.log2_exact, 40);
  expect_consistent(big);
  EXPECT_THROW(lipschitz_constant(0, 2), Error);
}

TEST(Bounds, WrlHiddenDim) {
  EXPECT_EQ(wrl_hidden_dim(4, 2, 1, 1).exact_text(), "16");
  const BoundValue six = wrl_hidden_dim(4, 2, 2, 3);
  EXPECT_EQ(six.exact_text(), "96");
  const BoundValue one = wrl_hidden_dim(1, 2, 1, 1);
  ASSERT_TRUE(one.exact);
  EXPECT_EQ(*one.exact, BigInt(16) << 32);
  expect_consistent(one);
}

TEST(Bounds, CompressionHiddenDim) {
  const BoundValue v = compression_hidden_dim(1, 4, 2, 1, 1);
  ASSERT_TRUE(v.log2_exact);
  EXPECT_EQ(*v.log2_exact, 2097164);
  EXPECT_EQ(v.exact_text(), "2^2097164");
  expect_consistent(v);
  Real50 last = compression_hidden_dim(Rational(1, 4), 4, 2, 1, 1).log2;
  for (int k = 1; k <= 8; ++k) {
    const Real50 now = compression_hidden_dim(Rational(k, 2), 4, 2, 1, 1).log2;
    EXPECT_LE(now, last);
    last = now;
  }
  EXPECT_THROW(compression_hidden_dim(1, 3, 2, 1, 1), Error);
}

TEST(Bounds, VcLowerBound) {
  EXPECT_EQ(vc_lower_bound(Rational(1, 6), 7, 1).exact_text(), "1");
  EXPECT_EQ(vc_lower_bound(Rational(1, 24), 2, 1).exact_text(), "4");
  const BoundValue v = vc_lower_bound(Rational(1, 8), 306, 1);
  EXPECT_LT(abs(v.log2 - Real50(153) * log2(Real50(4) / 3)), Real50(1e-30));
  EXPECT_THROW(vc_lower_bound(Rational(1, 3), 2, 1), Error);
}

TEST(Bounds, D0Threshold) {
  EXPECT_EQ(d0_threshold(4, 2, 1, 1).exact_text(), "18253611637");
  EXPECT_GT(*d0_threshold(4, 2, 1, 4).exact, *d0_threshold(4, 2, 1, 1).exact);
}

TEST(Bounds, NonUniversalityGap) {
  const BigInt threshold = *d0_threshold(4, 2, 1, 1).exact;
  const NonUniversalityReport at = non_universality_check(4, 2, 1, threshold.convert_to<std::int64_t>(), 1);
  EXPECT_TRUE(at.gap_holds);
  EXPECT_GE(at.margin, 0);
  EXPECT_FALSE(non_universality_check(4, 2, 1, 1, 1).gap_holds);
  Real50 last = non_universality_check(4, 2, 1, 14, 1).margin;
  for (std::int64_t d0 = 15; d0 < 200; ++d0) {
    const Real50 now = non_universality_check(4, 2, 1, d0, 1).margin;
    EXPECT_GT(now, last) << d0;
    last = now;
  }
}

TEST(Bounds, RationalParsing) {
  EXPECT_EQ(parse_rational("0.125"), Rational(1, 8));
  EXPECT_EQ(parse_rational("3/4"), Rational(3, 4));
  EXPECT_EQ(parse_rational("1e-2"), Rational(1, 100));
  EXPECT_THROW(parse_rational("abc"), Error);
}

TEST(Spike, HitsLabelsAtGridPoints) {
  std::mt19937_64 rng(51);
  const int N = 5;
  std::vector<double> y(25);
  for (auto& v : y) v = (rng() % 2) / (2.0 * N);
  const SpikeFunction f = spike_target(2, N, y);
  for (std::size_t m = 0; m < y.size(); ++m) EXPECT_EQ(f(f.center(m)), y[m]);
  EXPECT_THROW(spike_target(2, N, std::vector<double>(24)), Error);
}

TEST(Spike, ZeroLabelsGiveZeroFunction) {
  const SpikeFunction f = spike_target(3, 3, std::vector<double>(27, 0.0));
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(f(Eigen::Vector3d(u(rng), u(rng), u(rng))), 0.0);
}

TEST(Spike, EmpiricalLipschitzAtMostOne) {
  std::mt19937_64 rng(53);
  const int N = 4;
  std::vector<double> y(16);
  for (auto& v : y) v = (rng() % 2) / (2.0 * N);
  const SpikeFunction f = spike_target(2, N, y);
  EXPECT_LE(f.lipschitz_bound(), 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0), step(-0.05, 0.05);
  double worst = 0.0;
  for (int t = 0; t < 100000; ++t) {
    const Eigen::Vector2d a(u(rng), u(rng));
    const Eigen::Vector2d b = (a + Eigen::Vector2d(step(rng), step(rng))).cwiseMax(0.0).cwiseMin(1.0);
    const double dist = (a - b).norm();
    if (dist > 0) worst = std::max(worst, std::abs(f(a) - f(b)) / dist);
  }
  EXPECT_LE(worst, 1.0 + 1e-6);
}

}  // namespace
}  // namespace densecap
