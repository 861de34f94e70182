#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "densecap/error.hpp"
#include "densecap/experiments.hpp"

namespace densecap {
namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

/// Writes a tiny IDX pair: `count` 2x2 images whose pixels equal their index.
struct IdxFiles {
  std::string images, labels;
  explicit IdxFiles(const std::string& tag, std::uint32_t magic = 2051, std::size_t drop = 0) {
    const auto dir = std::filesystem::temp_directory_path();
    images = (dir / ("densecap_" + tag + "_images")).string();
    labels = (dir / ("densecap_" + tag + "_labels")).string();
    const std::uint32_t count = 5;
    {
      std::ofstream out(images, std::ios::binary);
      put_u32(out, magic);
      put_u32(out, count);
      put_u32(out, 2);
      put_u32(out, 2);
      for (std::uint32_t s = 0; s < count * 4 - drop; ++s) out.put(static_cast<char>(s * 10));
    }
    std::ofstream out(labels, std::ios::binary);
    put_u32(out, 2049);
    put_u32(out, count);
    for (std::uint32_t s = 0; s < count; ++s) out.put(static_cast<char>(s % 3));
  }
  ~IdxFiles() {
    std::remove(images.c_str());
    std::remove(labels.c_str());
  }
};

TEST(Mnist, ParsesIdxAndScalesPixels) {
  const IdxFiles f("ok");
  const Dataset d = load_idx(f.images, f.labels);
  ASSERT_EQ(d.size(), 5u);
  EXPECT_EQ(d.features(), 4);
  EXPECT_FLOAT_EQ(d.inputs(1, 0), 10.0f / 255.0f);
  EXPECT_FLOAT_EQ(d.inputs(0, 1), 40.0f / 255.0f);
  EXPECT_EQ(d.labels[4], 1);
  EXPECT_TRUE(d.is_classification());
}

TEST(Mnist, CorruptMagicNamesExpectedValue) {
  const IdxFiles f("magic", 2052);
  try {
    load_idx(f.images, f.labels);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_NE(std::string(e.what()).find("2051"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("offset 0"), std::string::npos) << e.what();
  }
}

TEST(Mnist, TruncationReportsOffset) {
  const IdxFiles f("trunc", 2051, 3);
  try {
    load_idx(f.images, f.labels);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("offset 33"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_idx("/nonexistent/images", "/nonexistent/labels"), Error);
}

TEST(Mnist, SubsetIsDeterministic) {
  const IdxFiles f("subset");
  const Dataset d = load_idx(f.images, f.labels);
  const Dataset a = subset(d, 3, 9), b = subset(d, 3, 9);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_THROW(subset(d, 6, 0), Error);
}

TEST(SpikeData, TargetsWithinRangeAndAtGridPoints) {
  const SpikeDataset s = make_spike_dataset(2, 4, 3, 2000);
  EXPECT_GE(s.data.targets.minCoeff(), 0.0f);
  EXPECT_LE(s.data.targets.maxCoeff(), static_cast<float>(1.0 / 8.0));
  for (std::size_t m = 0; m < s.target.grid_size(); ++m) {
    const double y = s.target.labels()[m];
    EXPECT_TRUE(y == 0.0 || y == 1.0 / 8.0);
    EXPECT_EQ(s.target(s.target.center(m)), y);
  }
}

TEST(Trainer, GradientMatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_LE(gradient_check(8, seed, true).relative_error, 1e-5);
    EXPECT_LE(gradient_check(8, seed, false).relative_error, 1e-5);
  }
}

TrainConfig spike_config(TrainMode mode) {
  TrainConfig c;
  c.width = 32;
  c.mode = mode;
  c.epochs = 3;
  c.batch = 32;
  c.seed = 4;
  c.dataset = parse_dataset_spec("spike:2,3,1024");
  return c;
}

TEST(Trainer, RunsAreBitwiseDeterministic) {
  const RunMetrics a = train(spike_config(TrainMode::standard));
  const RunMetrics b = train(spike_config(TrainMode::standard));
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  EXPECT_EQ(a.final_train_acc, b.final_train_acc);
  EXPECT_EQ(a.final_loss, b.final_loss);
}

TEST(Trainer, DenseModeRespectsClamp) {
  const RunMetrics m = train(spike_config(TrainMode::dense));
  EXPECT_LE(m.max_scaled_weight, 10.0 + 1e-12);
  const RunMetrics s = train(spike_config(TrainMode::standard));
  EXPECT_GT(s.max_scaled_weight, 10.0);  // He init on fan-in 32 already exceeds it
}

TEST(Trainer, LossDecreasesOnSpikeRegression) {
  TrainConfig c = spike_config(TrainMode::standard);
  c.epochs = 10;
  const RunMetrics m = train(c);
  EXPECT_LT(m.epoch_loss.back(), m.epoch_loss.front());
  for (double a : m.epoch_train_acc) {
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 100.0);
  }
}

TEST(Trainer, RejectsBadConfig) {
  TrainConfig c = spike_config(TrainMode::standard);
  c.lr = 0.0;
  EXPECT_THROW(train(c), Error);
  EXPECT_THROW(parse_dataset_spec("spike:2,3"), Error);
  EXPECT_THROW(parse_train_mode("sparse"), Error);
}

TEST(Sweep, RowsSortedCsvStableAndAggregated) {
  const SpikeDataset s = make_spike_dataset(2, 3, 1, 512);
  TrainConfig base = spike_config(TrainMode::standard);
  base.epochs = 1;
  const auto rows = sweep({128, 16}, {TrainMode::dense, TrainMode::standard}, {1, 0}, base,
                          s.data, s.data);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows.front().width, 16);
  EXPECT_EQ(rows.front().mode, TrainMode::standard);
  EXPECT_EQ(rows.front().seed, 0u);
  const auto again = sweep({16, 128}, {TrainMode::standard, TrainMode::dense}, {0, 1}, base,
                           s.data, s.data);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].train_acc, again[i].train_acc);
    EXPECT_EQ(rows[i].final_loss, again[i].final_loss);
  }
  const std::string csv = sweep_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "width,mode,seed,train_acc,test_acc,final_loss,wall_s,status");
  const auto cells = aggregate(rows);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].runs, 2);
}

TEST(Sweep, FailedRunIsRecordedAndSweepContinues) {
  const SpikeDataset s = make_spike_dataset(2, 3, 1, 64);
  TrainConfig base = spike_config(TrainMode::standard);
  base.epochs = 1;
  const auto rows = sweep({0, 4}, {TrainMode::standard}, {0}, base, s.data, s.data);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NE(rows[0].status, "ok");
  EXPECT_EQ(rows[1].status, "ok");
}

}  // namespace
}  // namespace densecap
