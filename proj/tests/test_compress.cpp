#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "densecap/compress.hpp"
#include "densecap/computational.hpp"
#include "densecap/error.hpp"
#include "densecap/network.hpp"

namespace densecap {
namespace {

TEST(Compress, TargetWidthProducesValidNetworkWithinBound) {
  std::mt19937_64 rng(61);
  const DenseNetwork net = random_network(3, 2, 2, 40, 5.0, rng);
  CompressOptions o;
  o.target_d = 8;
  o.samples = 2000;
  const CompressionResult r = compress_network(net, o);
  EXPECT_EQ(r.network.hidden_dim, 8);
  EXPECT_EQ(r.report.d_prime, 8);
  EXPECT_TRUE(r.report.projected_validation.ok()) << r.report.projected_validation.summary();
  EXPECT_TRUE(r.report.final_validation.ok());
  EXPECT_TRUE(r.report.roundtrip_exact);
  EXPECT_LE(r.report.delta_lower, r.report.delta_upper);
  EXPECT_LE(r.report.empirical_max_gap, r.report.implied_bound);
  EXPECT_LE(r.network.max_abs_parameter(), 5.0);
  validate_network(r.network);
}

TEST(Compress, WidthAlreadyWithinBudgetIsLossless) {
  std::mt19937_64 rng(62);
  const DenseNetwork net = random_network(2, 1, 1, 6, 4.0, rng);
  CompressOptions o;
  o.target_d = 6;
  o.samples = 500;
  const CompressionResult r = compress_network(net, o);
  EXPECT_LE(r.report.empirical_max_gap, 1e-12);
  EXPECT_LE(r.report.delta_upper, 1e-12);
}

TEST(Compress, RejectsWidthNotDivisibleByCells) {
  std::mt19937_64 rng(63);
  const DenseNetwork net = random_network(2, 2, 3, 12, 4.0, rng);
  CompressOptions o;
  o.target_d = 4;
  try {
    compress_network(net, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parameter);
    EXPECT_NE(std::string(e.what()).find("lcm(d0, dL) = 6"), std::string::npos) << e.what();
  }
  CompressOptions both;
  both.target_d = 6;
  both.epsilon = 0.5;
  EXPECT_THROW(compress_network(net, both), Error);
}

TEST(Compress, EpsilonModeChoosesAMultipleOfM) {
  std::mt19937_64 rng(64);
  const DenseNetwork net = random_network(2, 2, 1, 16, 4.0, rng);
  CompressOptions o;
  o.epsilon = 0.05;
  o.samples = 500;
  const CompressionResult r = compress_network(net, o);
  EXPECT_EQ(r.report.d_prime % 2, 0);
  EXPECT_LE(r.report.d_prime, 16);
  EXPECT_TRUE(r.report.final_validation.ok());
  EXPECT_LE(r.report.empirical_max_gap, r.report.implied_bound);
}

TEST(Compress, ZeroNetworkCollapses) {
  const DenseNetwork net = zero_network(2, 1, 1, 12, 4.0);
  CompressOptions o;
  o.epsilon = 0.1;
  o.samples = 100;
  const CompressionResult r = compress_network(net, o);
  EXPECT_EQ(r.report.d_prime, 1);
  EXPECT_EQ(r.report.empirical_max_gap, 0.0);
}

TEST(Compress, ReportIsJson) {
  std::mt19937_64 rng(65);
  CompressOptions o;
  o.target_d = 2;
  o.samples = 50;
  const CompressionResult r = compress_network(random_network(2, 1, 1, 8, 4.0, rng), o);
  const auto j = nlohmann::json::parse(report_json(r.report));
  EXPECT_EQ(j["d_prime"], 2);
  EXPECT_TRUE(j.contains("delta_hat"));
  EXPECT_TRUE(j.contains("theoretical_bound"));
  EXPECT_TRUE(j["stage_seconds"].contains("refine"));
}

}  // namespace
}  // namespace densecap
