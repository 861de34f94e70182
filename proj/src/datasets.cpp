#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>

#include "densecap/error.hpp"
#include "densecap/experiments.hpp"

#ifndef DENSECAP_DEFAULT_MNIST_DIR
#define DENSECAP_DEFAULT_MNIST_DIR ""
#endif

namespace densecap {

namespace {

std::vector<unsigned char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::data, path + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t big_endian(const std::vector<unsigned char>& bytes, std::size_t offset,
                         const std::string& path) {
  if (bytes.size() < offset + 4)
    throw Error(ErrorKind::data, path + ": offset " + std::to_string(offset) +
                                     ": truncated header (file has " +
                                     std::to_string(bytes.size()) + " bytes)");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void expect_magic(const std::vector<unsigned char>& bytes, std::uint32_t expected,
                  const std::string& path) {
  const std::uint32_t magic = big_endian(bytes, 0, path);
  if (magic != expected)
    throw Error(ErrorKind::data, path + ": offset 0: expected magic " + std::to_string(expected) +
                                     ", found " + std::to_string(magic));
}

void expect_payload(const std::vector<unsigned char>& bytes, std::size_t header,
                    std::size_t payload, const std::string& path) {
  if (bytes.size() < header + payload)
    throw Error(ErrorKind::data, path + ": offset " + std::to_string(bytes.size()) +
                                     ": truncated data, expected " +
                                     std::to_string(header + payload) + " bytes");
  if (bytes.size() > header + payload)
    throw Error(ErrorKind::data, path + ": offset " + std::to_string(header + payload) +
                                     ": unexpected trailing bytes");
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto images = read_bytes(images_path);
  expect_magic(images, 2051, images_path);
  const std::size_t count = big_endian(images, 4, images_path);
  const std::size_t rows = big_endian(images, 8, images_path);
  const std::size_t cols = big_endian(images, 12, images_path);
  expect_payload(images, 16, count * rows * cols, images_path);

  const auto labels = read_bytes(labels_path);
  expect_magic(labels, 2049, labels_path);
  const std::size_t label_count = big_endian(labels, 4, labels_path);
  if (label_count != count)
    throw Error(ErrorKind::data, labels_path + ": offset 4: " + std::to_string(label_count) +
                                     " labels for " + std::to_string(count) + " images");
  expect_payload(labels, 8, count, labels_path);

  Dataset data;
  const auto features = static_cast<Eigen::Index>(rows * cols);
  data.inputs.resize(features, static_cast<Eigen::Index>(count));
  for (std::size_t s = 0; s < count; ++s)
    for (Eigen::Index f = 0; f < features; ++f)
      data.inputs(f, static_cast<Eigen::Index>(s)) =
          static_cast<float>(images[16 + s * static_cast<std::size_t>(features) +
                                    static_cast<std::size_t>(f)]) /
          255.0f;
  data.labels.resize(count);
  int max_label = 0;
  for (std::size_t s = 0; s < count; ++s) {
    data.labels[s] = labels[8 + s];
    max_label = std::max(max_label, data.labels[s]);
  }
  data.classes = std::max(10, max_label + 1);
  return data;
}

std::string mnist_directory(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("DENSECAP_DATA"); env != nullptr && *env != '\0') return env;
  return DENSECAP_DEFAULT_MNIST_DIR;
}

MnistData load_mnist(const std::string& dir) {
  if (dir.empty())
    throw Error(ErrorKind::data, "no MNIST directory: set DENSECAP_DATA or pass --data-dir");
  return {load_idx(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte"),
          load_idx(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte")};
}

Dataset subset(const Dataset& data, std::size_t count, std::uint64_t seed) {
  if (count == 0 || count > data.size())
    throw Error(ErrorKind::parameter, "subset size " + std::to_string(count) +
                                          " outside [1, " + std::to_string(data.size()) + "]");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);
  std::sort(order.begin(), order.end());

  Dataset out;
  out.classes = data.classes;
  out.hit_tolerance = data.hit_tolerance;
  out.inputs.resize(data.inputs.rows(), static_cast<Eigen::Index>(count));
  if (data.is_classification()) out.labels.resize(count);
  else out.targets.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const auto src = static_cast<Eigen::Index>(order[i]);
    const auto dst = static_cast<Eigen::Index>(i);
    out.inputs.col(dst) = data.inputs.col(src);
    if (data.is_classification()) out.labels[i] = data.labels[order[i]];
    else out.targets(dst) = data.targets(src);
  }
  return out;
}

SpikeDataset make_spike_dataset(int d0, int N, std::uint64_t seed, std::size_t samples) {
  std::mt19937_64 rng(seed);
  std::size_t grid = 1;
  for (int i = 0; i < d0 && N > 0; ++i) grid *= static_cast<std::size_t>(N);
  std::bernoulli_distribution bit(0.5);
  std::vector<double> heights(grid);
  for (auto& y : heights) y = bit(rng) ? 1.0 / (2.0 * N) : 0.0;
  SpikeFunction target = spike_target(d0, N, std::move(heights));

  Dataset data;
  data.hit_tolerance = 1.0 / (4.0 * N);
  data.inputs.resize(d0, static_cast<Eigen::Index>(samples));
  data.targets.resize(static_cast<Eigen::Index>(samples));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd x(d0);
  for (std::size_t s = 0; s < samples; ++s) {
    for (int i = 0; i < d0; ++i) x(i) = unit(rng);
    data.inputs.col(static_cast<Eigen::Index>(s)) = x.cast<float>();
    data.targets(static_cast<Eigen::Index>(s)) = static_cast<float>(target(x));
  }
  return {std::move(target), std::move(data)};
}

}  // namespace densecap
