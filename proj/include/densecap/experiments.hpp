#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "densecap/bounds.hpp"

namespace densecap {

/// In-memory dataset: one sample per column of `inputs`. Classification
/// sets fill `labels` (and `classes` > 0); regression sets fill `targets`.
struct Dataset {
  Eigen::MatrixXf inputs;
  std::vector<int> labels;
  Eigen::VectorXf targets;
  int classes = 0;
  /// Regression accuracy counts predictions within this distance of target.
  double hit_tolerance = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }
  int features() const { return static_cast<int>(inputs.rows()); }
  bool is_classification() const { return classes > 0; }
};

/// Read an IDX image file (magic 2051) and its label file (magic 2049).
/// Pixels are scaled to [0, 1]. Errors name the file and byte offset.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

struct MnistData {
  Dataset train;
  Dataset test;
};

/// Load the four standard MNIST files from `dir`.
MnistData load_mnist(const std::string& dir);

/// Directory holding MNIST: `explicit_dir` if non-empty, else $DENSECAP_DATA,
/// else the build-time default.
std::string mnist_directory(const std::string& explicit_dir = "");

/// `count` samples chosen uniformly without replacement, deterministic in
/// `seed`, kept in their original order.
Dataset subset(const Dataset& data, std::size_t count, std::uint64_t seed);

struct SpikeDataset {
  SpikeFunction target;
  Dataset data;
};

/// Uniform inputs in [0,1]^d0 labelled by a spike function whose heights are
/// y_m = z_m / (2N) with random bits z_m drawn from `seed`.
SpikeDataset make_spike_dataset(int d0, int N, std::uint64_t seed, std::size_t samples);

enum class TrainMode { standard, dense };
const char* to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& text);

enum class DatasetKind { mnist, mnist_subset, spike };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::mnist;
  std::size_t subset_size = 0;  ///< for mnist_subset
  int spike_d0 = 2;             ///< for spike
  int spike_n = 4;
  std::size_t spike_samples = 4096;
  std::string data_dir;         ///< overrides $DENSECAP_DATA
};

/// Parse "mnist", "mnist-subset:N" or "spike:d0,N,samples".
DatasetSpec parse_dataset_spec(const std::string& text);
std::string to_string(const DatasetSpec& spec);

struct TrainConfig {
  int width = 128;
  TrainMode mode = TrainMode::standard;
  double clamp_numerator = 10.0;
  double lr = 1e-3;
  int batch = 128;
  int epochs = 20;
  std::uint64_t seed = 0;
  DatasetSpec dataset;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

/// Throws a parameter error unless every hyperparameter is in range.
void validate_config(const TrainConfig& config);

struct RunMetrics {
  std::vector<double> epoch_loss;      ///< mean mini-batch loss per epoch
  std::vector<double> epoch_train_acc; ///< running mini-batch accuracy per epoch
  double final_train_acc = 0.0;        ///< full pass over the training set
  double final_test_acc = 0.0;
  double final_loss = 0.0;             ///< full-pass training loss
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  /// Largest |W_ij| * fan_in seen after any optimizer step (dense mode check).
  double max_scaled_weight = 0.0;
};

/// Train a one-hidden-layer ReLU network on the dataset named in `config`.
RunMetrics train(const TrainConfig& config);

/// Train on already loaded data; `config.dataset` is ignored.
RunMetrics train_on(const TrainConfig& config, const Dataset& train_set, const Dataset& test_set);

struct GradientCheck {
  double relative_error = 0.0;  ///< ||g - g_fd|| / (||g|| + ||g_fd||)
  double max_abs_error = 0.0;
  std::size_t parameters = 0;
};

/// Compare analytic backprop of a width-`width` network against central
/// differences with step `h`, in double precision, for both losses.
GradientCheck gradient_check(int width, std::uint64_t seed, bool classification, double h = 1e-4);

struct SweepRow {
  int width = 0;
  TrainMode mode = TrainMode::standard;
  std::uint64_t seed = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double final_loss = 0.0;
  double wall_s = 0.0;
  std::string status = "ok";
};

/// One run per (width, mode, seed), in parallel; rows sorted by that key.
/// A failing run is recorded with its error in `status`.
std::vector<SweepRow> sweep(const std::vector<int>& widths, const std::vector<TrainMode>& modes,
                            const std::vector<std::uint64_t>& seeds, const TrainConfig& base,
                            const Dataset& train_set, const Dataset& test_set);

/// Load the dataset named in `base` and sweep over it.
std::vector<SweepRow> sweep(const std::vector<int>& widths, const std::vector<TrainMode>& modes,
                            const std::vector<std::uint64_t>& seeds, const TrainConfig& base);

struct SweepCell {
  int width = 0;
  TrainMode mode = TrainMode::standard;
  int runs = 0;
  double train_mean = 0.0, train_std = 0.0;
  double test_mean = 0.0, test_std = 0.0;
};

/// Mean and sample standard deviation over the successful runs of each cell.
std::vector<SweepCell> aggregate(const std::vector<SweepRow>& rows);

/// CSV with header width,mode,seed,train_acc,test_acc,final_loss,wall_s,status.
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string aggregate_table(const std::vector<SweepCell>& cells);

}  // namespace densecap
