#include <gtest/gtest.h>

#include <random>

#include "densecap/error.hpp"
#include "densecap/network.hpp"

namespace densecap {
namespace {

/// Straight-line evaluator written from the layer rule with explicit loops:
/// h_i = ReLU( (sum_j W_ij h_j + d_prev b_i) / (d_prev (L + 2)) ), no ReLU last.
std::vector<double> oracle_forward(const DenseNetwork& net, const std::vector<double>& x) {
  std::vector<double> h = x;
  const int L = net.depth;
  for (int l = 0; l < L; ++l) {
    const auto& W = net.weights[static_cast<std::size_t>(l)];
    const auto& b = net.biases[static_cast<std::size_t>(l)];
    const double d_prev = static_cast<double>(h.size());
    std::vector<double> next(static_cast<std::size_t>(W.rows()));
    for (int i = 0; i < W.rows(); ++i) {
      double s = 0.0;
      for (int j = 0; j < W.cols(); ++j) s += W(i, j) * h[static_cast<std::size_t>(j)];
      s = (s + d_prev * b(i)) / (d_prev * (L + 2));
      next[static_cast<std::size_t>(i)] = l + 1 < L ? std::max(0.0, s) : s;
    }
    h = next;
  }
  return h;
}

TEST(Network, ForwardMatchesOracleOn1000Pairs) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> depth(2, 5), cells(1, 3), mult(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int L = depth(rng), d0 = cells(rng), dL = cells(rng);
    const int d = std::lcm(d0, dL) * mult(rng);
    const DenseNetwork net = random_network(L, d0, dL, d, 1.0 + 9.0 * unit(rng), rng);
    std::vector<double> x(static_cast<std::size_t>(d0));
    for (auto& v : x) v = unit(rng);
    const Eigen::VectorXd got =
        forward(net, Eigen::Map<const Eigen::VectorXd>(x.data(), d0));
    const auto want = oracle_forward(net, x);
    for (int i = 0; i < dL; ++i)
      worst = std::max(worst, std::abs(got(i) - want[static_cast<std::size_t>(i)]));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Network, ZeroNetworkGivesZeroOutput) {
  const DenseNetwork net = zero_network(3, 2, 2, 4, 5.0);
  EXPECT_EQ(forward(net, Eigen::Vector2d(0.3, 0.9)), Eigen::Vector2d::Zero());
}

TEST(Network, BiasEntersInsideTheNormalisedSum) {
  // L=2, d0=dL=d=1: h1 = ReLU((w1 x + b1)/3), out = (w2 h1 + b2)/3
  DenseNetwork net = zero_network(2, 1, 1, 1, 4.0);
  net.weights[0](0, 0) = 2.0;
  net.biases[0](0) = 1.0;
  net.weights[1](0, 0) = 3.0;
  net.biases[1](0) = -1.0;
  const double h1 = (2.0 * 0.5 + 1.0) / 4.0;
  EXPECT_DOUBLE_EQ(forward(net, Eigen::VectorXd::Constant(1, 0.5))(0), (3.0 * h1 - 1.0) / 4.0);
}

TEST(Network, RejectsShapeAndBoundViolations) {
  EXPECT_THROW(zero_network(1, 1, 1, 2, 4.0), Error);
  EXPECT_THROW(zero_network(2, 3, 1, 4, 4.0), Error);
  DenseNetwork net = zero_network(2, 1, 1, 2, 4.0);
  net.weights[1](0, 1) = 4.5;
  try {
    validate_network(net);
    FAIL() << "expected an invalid_bound error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_bound);
    EXPECT_NE(std::string(e.what()).find("W2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(forward(zero_network(2, 2, 1, 2, 4.0), Eigen::VectorXd::Zero(3)), Error);
}

TEST(Network, ClampIsProjectionAndIdempotent) {
  DenseNetwork net = zero_network(2, 1, 1, 2, 10.0);
  net.weights[0](0, 0) = 8.0;
  net.weights[0](1, 0) = -9.0;
  net.biases[1](0) = 1.0;
  const DenseNetwork once = clamp_dense(net, 4.0);
  EXPECT_EQ(once.weights[0](0, 0), 4.0);
  EXPECT_EQ(once.weights[0](1, 0), -4.0);
  EXPECT_EQ(once.biases[1](0), 1.0);
  const DenseNetwork twice = clamp_dense(once, 4.0);
  EXPECT_EQ(twice.weights[0], once.weights[0]);
  EXPECT_LE(once.max_abs_parameter(), 4.0);
}

TEST(Network, ParamCountFormulaValues) {
  EXPECT_EQ(param_count(2, 1, 1, 4), 29u);
  EXPECT_EQ(param_count(2, 1, 1, 1), 5u);
  for (std::uint64_t d = 1; d < 50; ++d)
    EXPECT_GT(param_count(3, 2, 2, d + 1), param_count(3, 2, 2, d));
}

TEST(Network, StoredEntriesFallShortOfFormulaByExactlyDSquared) {
  for (int L = 2; L <= 8; ++L)
    for (int d0 = 1; d0 <= 8; ++d0)
      for (int dL = 1; dL <= 8; ++dL)
        for (int d = 1; d <= 8; ++d) {
          if (d % d0 != 0 || d % dL != 0) continue;
          // literal enumeration of matrix and vector entries
          std::uint64_t entries = 0;
          for (int l = 1; l <= L; ++l) {
            const int rows = l == L ? dL : d;
            const int cols = l == 1 ? d0 : d;
            entries += static_cast<std::uint64_t>(rows * cols + rows);
          }
          const DenseNetwork net = zero_network(L, d0, dL, d, 4.0);
          ASSERT_EQ(count_parameters(net), entries);
          ASSERT_EQ(param_count(L, d0, dL, d), entries + static_cast<std::uint64_t>(d * d));
        }
}

TEST(Network, SerializeRoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  const DenseNetwork net = random_network(3, 2, 1, 4, 6.5, rng);
  const DenseNetwork back = deserialize(serialize(net));
  EXPECT_EQ(back.bound, net.bound);
  for (int l = 0; l < 3; ++l) {
    EXPECT_EQ(back.weights[l], net.weights[l]);
    EXPECT_EQ(back.biases[l], net.biases[l]);
  }
}

TEST(Network, TruncatedRecordNamesMissingSection) {
  std::mt19937_64 rng(5);
  const std::string text = serialize(random_network(2, 1, 1, 2, 4.0, rng));
  const std::string cut = text.substr(0, text.find("W 2"));
  try {
    deserialize(cut);
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
    EXPECT_NE(std::string(e.what()).find("W 2"), std::string::npos) << e.what();
  }
}

TEST(Network, RecordWithOversizedEntryIsRejected) {
  std::mt19937_64 rng(5);
  DenseNetwork net = random_network(2, 1, 1, 2, 4.0, rng);
  net.bound = 100.0;
  net.weights[0](1, 0) = 50.0;
  std::string text = serialize(net);
  const std::size_t meta = text.find('\n') + 1;
  text.replace(meta, text.find('\n', meta) - meta, "2 1 1 2 4");
  EXPECT_THROW(deserialize(text), Error);
}

}  // namespace
}  // namespace densecap
