#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "densecap/computational.hpp"
#include "densecap/cutnorm.hpp"
#include "densecap/error.hpp"
#include "densecap/network.hpp"
#include "densecap/regularity.hpp"

namespace densecap {
namespace {

/// Kernel on I_n with a planted 2x2 block structure plus uniform noise.
StepKernel planted_kernel(std::mt19937_64& rng, int n, double noise) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<int> side(static_cast<std::size_t>(n));
  for (auto& s : side) s = static_cast<int>(rng() % 2);
  const double level[2][2] = {{0.6, -0.4}, {-0.3, 0.5}};
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      c(i, j) = std::clamp(level[side[i]][side[j]] + noise * u(rng), -1.0, 1.0);
  return StepKernel(Partition::equipartition(n), c);
}

TEST(Regularity, ProjectionKeepsBlockIntegrals) {
  std::mt19937_64 rng(41);
  const StepKernel k = planted_kernel(rng, 12, 0.3);
  const Partition p = Partition::equipartition(12).relabel({0, 0, 1, 1, 1, 2, 2, 0, 1, 2, 2, 2});
  const StepKernel kp = project(k, p);
  const MeasuredMatrix a = MeasuredMatrix::of(k);
  const MeasuredMatrix b = MeasuredMatrix::of(kp.on(k.partition()));
  EXPECT_NEAR((a.row_measure.asDiagonal() * a.values * a.col_measure.asDiagonal()).sum(),
              (b.row_measure.asDiagonal() * b.values * b.col_measure.asDiagonal()).sum(), 1e-14);
  // projecting twice changes nothing
  EXPECT_LE((project(kp, p).coeffs() - kp.coeffs()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Regularity, TraceIsMonotoneAndCertified) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 10; ++t) {
    const StepKernel k = planted_kernel(rng, 16, 0.4);
    const RegularityTrace tr = weak_regularity(k, 0.5);
    ASSERT_FALSE(tr.steps.empty());
    for (std::size_t i = 1; i < tr.steps.size(); ++i)
      EXPECT_GE(tr.steps[i].energy, tr.steps[i - 1].energy - 1e-12);
    EXPECT_EQ(tr.iteration_cap, 16);
    EXPECT_LE(static_cast<long long>(tr.steps.size()) - 1, tr.iteration_cap);
    if (tr.termination == Termination::below_epsilon) {
      EXPECT_LT(tr.final_upper, 0.5);
      // independent check of the certificate
      const MeasuredMatrix diff = MeasuredMatrix::difference(k, tr.kernel);
      EXPECT_NEAR(kernel_cut_norm_exact(diff).value, tr.final_upper, 1e-9);
    }
  }
}

TEST(Regularity, RejectsBadEpsilon) {
  EXPECT_THROW(weak_regularity(StepKernel::constant(0.1), 0.0), Error);
  EXPECT_THROW(weak_regularity(StepKernel::constant(0.1), 3.0), Error);
}

TEST(Regularity, LayerRespectingRefinementKeepsCellsWhole) {
  std::mt19937_64 rng(43);
  const ComputationalKernel k = induce_kernel(random_network(3, 2, 2, 8, 5.0, rng));
  const LayerStructure& s = k.layers();
  const LayerRegularity r = layer_respecting_regularity(k, 0.3);
  for (int p = 0; p < s.n(); ++p)
    for (int q = 0; q < s.n(); ++q) {
      const bool same = r.classes[p] == r.classes[q];
      if (same) EXPECT_EQ(s.layer_of(p), s.layer_of(q));
      if (s.layer_of(p) == 0 && s.layer_of(q) == 0)
        EXPECT_EQ(same, s.input_cell(p) == s.input_cell(q));
      if (s.layer_of(p) == s.bias_layer() && s.layer_of(q) == s.bias_layer()) EXPECT_TRUE(same);
    }
  EXPECT_LE(r.after.lower, r.after.upper + 1e-15);
}

TEST(Regularity, EquitizeProducesEqualPartsWithFewRemainders) {
  std::mt19937_64 rng(44);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::int64_t> w(1 + rng() % 6);
    for (auto& x : w) x = 1 + static_cast<std::int64_t>(rng() % 7);
    const Partition p = Partition::from_weights(w);
    const int m = static_cast<int>(p.size()) + 1 + static_cast<int>(rng() % 10);
    const EquitizeResult e = equitize(p, m);
    ASSERT_EQ(static_cast<int>(e.partition.size()), m);
    ASSERT_TRUE(e.partition.is_equipartition());
    ASSERT_LE(e.h, static_cast<int>(p.size()));
    ASSERT_EQ(e.refinement_parts + e.h, m);
    // refinement parts sit inside their parent
    const auto map = part_map(common_refinement(e.partition, p), p);
    const auto own = part_map(common_refinement(e.partition, p), e.partition);
    for (std::size_t a = 0; a < map.size(); ++a) {
      const int parent = e.parent[static_cast<std::size_t>(own[a])];
      if (parent >= 0) ASSERT_EQ(map[a], parent);
    }
  }
  EXPECT_THROW(equitize(Partition::equipartition(3), 3), Error);
}

TEST(Regularity, EquitizeRefinesWhenMeasuresDivide) {
  const EquitizeResult e = equitize(Partition::from_weights({1, 1, 2}), 8);
  EXPECT_EQ(e.h, 0);
  EXPECT_TRUE(is_refinement(e.partition, Partition::from_weights({1, 1, 2})));
}

TEST(Regularity, SortToIntervalsLaysOutByLeftmostPoint) {
  const Partition q = Partition::from_atoms(4, {0, 1, 2, 3, 4}, {1, 0, 3, 2});
  const auto perm = sort_to_intervals(q);
  for (std::size_t i = 1; i < perm.size(); ++i)
    EXPECT_LT(q.leftmost(static_cast<std::size_t>(perm[i - 1])),
              q.leftmost(static_cast<std::size_t>(perm[i])));
  const auto inv = inverse_permutation(perm);
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(inv[static_cast<std::size_t>(perm[i])], static_cast<int>(i));
  EXPECT_THROW(inverse_permutation({0, 0}), Error);
}

}  // namespace
}  // namespace densecap
