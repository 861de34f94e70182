#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "densecap/error.hpp"
#include "densecap/experiments.hpp"

namespace densecap {

const char* to_string(TrainMode mode) {
  return mode == TrainMode::standard ? "standard" : "dense";
}

TrainMode parse_train_mode(const std::string& text) {
  if (text == "standard") return TrainMode::standard;
  if (text == "dense") return TrainMode::dense;
  throw Error(ErrorKind::parameter, "unknown training mode '" + text + "' (standard|dense)");
}

namespace {

long long parse_count(const std::string& text) {
  long long v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) return -1;
  return v;
}

}  // namespace

DatasetSpec parse_dataset_spec(const std::string& text) {
  DatasetSpec spec;
  const auto bad = [&] {
    return Error(ErrorKind::parameter,
                 "bad dataset '" + text + "' (mnist | mnist-subset:N | spike:d0,N,samples)");
  };
  if (text == "mnist") return spec;
  if (text.rfind("mnist-subset:", 0) == 0) {
    spec.kind = DatasetKind::mnist_subset;
    const long long n = parse_count(text.substr(13));
    if (n <= 0) throw bad();
    spec.subset_size = static_cast<std::size_t>(n);
    return spec;
  }
  if (text.rfind("spike:", 0) == 0) {
    spec.kind = DatasetKind::spike;
    std::vector<long long> v;
    std::string rest = text.substr(6);
    std::size_t start = 0;
    while (start <= rest.size()) {
      const std::size_t comma = std::min(rest.find(',', start), rest.size());
      v.push_back(parse_count(rest.substr(start, comma - start)));
      start = comma + 1;
    }
    if (v.size() != 3 || v[0] <= 0 || v[1] <= 0 || v[2] <= 0) throw bad();
    spec.spike_d0 = static_cast<int>(v[0]);
    spec.spike_n = static_cast<int>(v[1]);
    spec.spike_samples = static_cast<std::size_t>(v[2]);
    return spec;
  }
  throw bad();
}

std::string to_string(const DatasetSpec& spec) {
  switch (spec.kind) {
    case DatasetKind::mnist: return "mnist";
    case DatasetKind::mnist_subset: return "mnist-subset:" + std::to_string(spec.subset_size);
    case DatasetKind::spike:
      return "spike:" + std::to_string(spec.spike_d0) + "," + std::to_string(spec.spike_n) + "," +
             std::to_string(spec.spike_samples);
  }
  return "?";
}

void validate_config(const TrainConfig& c) {
  const auto need = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::parameter, what);
  };
  need(c.width >= 1, "width must be positive");
  need(c.batch >= 1, "batch must be positive");
  need(c.epochs >= 0, "epochs must be non-negative");
  need(c.lr > 0 && std::isfinite(c.lr), "learning rate must be positive");
  need(c.clamp_numerator > 0, "clamp numerator must be positive");
  need(c.beta1 >= 0 && c.beta1 < 1 && c.beta2 >= 0 && c.beta2 < 1, "Adam betas must lie in [0,1)");
  need(c.adam_eps > 0, "Adam epsilon must be positive");
}

namespace {

/// One-hidden-layer ReLU network z = W2 ReLU(W1 x + b1) + b2.
template <typename T>
struct Mlp {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  Matrix w1, w2;
  Vector b1, b2;
};

/// He-uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
template <typename T>
Mlp<T> init_mlp(int in, int width, int out, std::mt19937_64& rng) {
  Mlp<T> m;
  const auto fill = [&rng](auto& w, int fan_in) {
    std::uniform_real_distribution<double> u(-std::sqrt(6.0 / fan_in), std::sqrt(6.0 / fan_in));
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<T>(u(rng));
  };
  m.w1.resize(width, in);
  m.w2.resize(out, width);
  fill(m.w1, in);
  fill(m.w2, width);
  m.b1 = Mlp<T>::Vector::Zero(width);
  m.b2 = Mlp<T>::Vector::Zero(out);
  return m;
}

/// Targets for one batch: class labels or regression values.
template <typename T>
struct Batch {
  typename Mlp<T>::Matrix x;
  std::vector<int> labels;
  typename Mlp<T>::Vector targets;
};

struct Score {
  double loss = 0.0;
  std::size_t hits = 0;
};

/// Loss (mean cross-entropy, or half mean squared error) and hits; fills
/// gradients when `grad` is non-null.
template <typename T>
Score evaluate(const Mlp<T>& m, const Batch<T>& b, bool classification, double tolerance,
               Mlp<T>* grad) {
  using Matrix = typename Mlp<T>::Matrix;
  const auto n = b.x.cols();
  const Matrix z1 = (m.w1 * b.x).colwise() + m.b1;
  const Matrix h = z1.cwiseMax(T(0));
  Matrix z2 = (m.w2 * h).colwise() + m.b2;
  Score score;
  Matrix dz2(z2.rows(), n);
  if (classification) {
    for (Eigen::Index j = 0; j < n; ++j) {
      auto col = z2.col(j);
      const T top = col.maxCoeff();
      Eigen::Index arg = 0;
      col.maxCoeff(&arg);
      const int y = b.labels[static_cast<std::size_t>(j)];
      if (arg == y) ++score.hits;
      const auto e = (col.array() - top).exp();
      const T total = e.sum();
      score.loss += static_cast<double>(std::log(total) - (col(y) - top));
      dz2.col(j) = e.matrix() / total;
      dz2(y, j) -= T(1);
    }
  } else {
    for (Eigen::Index j = 0; j < n; ++j) {
      const T r = z2(0, j) - b.targets(j);
      score.loss += 0.5 * static_cast<double>(r * r);
      if (std::abs(static_cast<double>(r)) < tolerance) ++score.hits;
      dz2(0, j) = r;
    }
  }
  score.loss /= static_cast<double>(n);
  if (grad != nullptr) {
    dz2 /= static_cast<T>(n);
    grad->w2.noalias() = dz2 * h.transpose();
    grad->b2 = dz2.rowwise().sum();
    Matrix dz1 = m.w2.transpose() * dz2;
    dz1.array() *= (z1.array() > T(0)).template cast<T>();
    grad->w1.noalias() = dz1 * b.x.transpose();
    grad->b1 = dz1.rowwise().sum();
  }
  return score;
}

template <typename T>
Batch<T> gather(const Dataset& data, const std::size_t* idx, std::size_t count) {
  Batch<T> b;
  b.x.resize(data.inputs.rows(), static_cast<Eigen::Index>(count));
  if (data.is_classification()) b.labels.resize(count);
  else b.targets.resize(static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    const auto src = static_cast<Eigen::Index>(idx[j]);
    b.x.col(static_cast<Eigen::Index>(j)) = data.inputs.col(src).template cast<T>();
    if (data.is_classification()) b.labels[j] = data.labels[idx[j]];
    else b.targets(static_cast<Eigen::Index>(j)) = static_cast<T>(data.targets(src));
  }
  return b;
}

/// Full-pass loss and accuracy (percent), in chunks.
Score full_pass(const Mlp<float>& m, const Dataset& data, double* accuracy) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Score total;
  constexpr std::size_t chunk = 4096;
  for (std::size_t start = 0; start < idx.size(); start += chunk) {
    const std::size_t count = std::min(chunk, idx.size() - start);
    const Score s = evaluate(m, gather<float>(data, idx.data() + start, count),
                             data.is_classification(), data.hit_tolerance, static_cast<Mlp<float>*>(nullptr));
    total.loss += s.loss * static_cast<double>(count);
    total.hits += s.hits;
  }
  const double n = std::max<double>(1.0, static_cast<double>(data.size()));
  total.loss /= n;
  *accuracy = 100.0 * static_cast<double>(total.hits) / n;
  return total;
}

struct Adam {
  Mlp<float> m, v;
  long long t = 0;
};

template <typename Derived>
void adam_update(Eigen::MatrixBase<Derived>& p, const Eigen::MatrixBase<Derived>& g,
                 Eigen::MatrixBase<Derived>& m, Eigen::MatrixBase<Derived>& v,
                 const TrainConfig& c, double correction1, double correction2) {
  const auto b1 = static_cast<float>(c.beta1);
  const auto b2 = static_cast<float>(c.beta2);
  m.derived() = b1 * m.derived() + (1.0f - b1) * g.derived();
  v.derived() = b2 * v.derived() + (1.0f - b2) * g.derived().cwiseProduct(g.derived());
  const auto lr = static_cast<float>(c.lr);
  const auto c1 = static_cast<float>(correction1);
  const auto c2 = static_cast<float>(correction2);
  const auto eps = static_cast<float>(c.adam_eps);
  p.derived().array() -= lr * (m.derived().array() / c1) /
                         ((v.derived().array() / c2).sqrt() + eps);
}

double clamp_and_measure(Mlp<float>& net, const TrainConfig& c, bool clamp) {
  const auto fan1 = static_cast<double>(net.w1.cols());
  const auto fan2 = static_cast<double>(net.w2.cols());
  if (clamp) {
    const auto l1 = static_cast<float>(c.clamp_numerator / fan1);
    const auto l2 = static_cast<float>(c.clamp_numerator / fan2);
    net.w1 = net.w1.cwiseMax(-l1).cwiseMin(l1);
    net.w2 = net.w2.cwiseMax(-l2).cwiseMin(l2);
  }
  return std::max(net.w1.cwiseAbs().maxCoeff() * fan1, net.w2.cwiseAbs().maxCoeff() * fan2);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

}  // namespace

RunMetrics train_on(const TrainConfig& config, const Dataset& train_set, const Dataset& test_set) {
  validate_config(config);
  if (train_set.size() == 0) throw Error(ErrorKind::data, "empty training set");
  if (test_set.features() != train_set.features())
    throw Error(ErrorKind::dimension, "train and test sets have different feature counts");
  const auto start = std::chrono::steady_clock::now();
  const bool classification = train_set.is_classification();
  const int outputs = classification ? train_set.classes : 1;

  auto init_rng = stream(config.seed, 1);
  auto shuffle_rng = stream(config.seed, 2);
  Mlp<float> net = init_mlp<float>(train_set.features(), config.width, outputs, init_rng);
  Adam adam;
  adam.m = {Eigen::MatrixXf::Zero(net.w1.rows(), net.w1.cols()),
            Eigen::MatrixXf::Zero(net.w2.rows(), net.w2.cols()),
            Eigen::VectorXf::Zero(net.b1.size()), Eigen::VectorXf::Zero(net.b2.size())};
  adam.v = adam.m;
  Mlp<float> grad = adam.m;

  RunMetrics metrics;
  metrics.seed = config.seed;
  const bool dense = config.mode == TrainMode::dense;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t s = 0; s < order.size(); s += batch) {
      const std::size_t count = std::min(batch, order.size() - s);
      const Score sc = evaluate(net, gather<float>(train_set, order.data() + s, count),
                                classification, train_set.hit_tolerance, &grad);
      loss_sum += sc.loss * static_cast<double>(count);
      hits += sc.hits;
      ++adam.t;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(adam.t));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(adam.t));
      adam_update(net.w1, grad.w1, adam.m.w1, adam.v.w1, config, c1, c2);
      adam_update(net.b1, grad.b1, adam.m.b1, adam.v.b1, config, c1, c2);
      adam_update(net.w2, grad.w2, adam.m.w2, adam.v.w2, config, c1, c2);
      adam_update(net.b2, grad.b2, adam.m.b2, adam.v.b2, config, c1, c2);
      metrics.max_scaled_weight =
          std::max(metrics.max_scaled_weight, clamp_and_measure(net, config, dense));
    }
    const auto n = static_cast<double>(order.size());
    metrics.epoch_loss.push_back(loss_sum / n);
    metrics.epoch_train_acc.push_back(100.0 * static_cast<double>(hits) / n);
  }
  metrics.final_loss = full_pass(net, train_set, &metrics.final_train_acc).loss;
  if (test_set.size() > 0) full_pass(net, test_set, &metrics.final_test_acc);
  metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return metrics;
}

RunMetrics train(const TrainConfig& config) {
  validate_config(config);
  const DatasetSpec& spec = config.dataset;
  if (spec.kind == DatasetKind::spike) {
    SpikeDataset all =
        make_spike_dataset(spec.spike_d0, spec.spike_n, config.seed, 2 * spec.spike_samples);
    const auto half = static_cast<Eigen::Index>(spec.spike_samples);
    Dataset tr = all.data;
    Dataset te = all.data;
    tr.inputs = all.data.inputs.leftCols(half);
    tr.targets = all.data.targets.head(half);
    te.inputs = all.data.inputs.rightCols(half);
    te.targets = all.data.targets.tail(half);
    return train_on(config, tr, te);
  }
  MnistData data = load_mnist(mnist_directory(spec.data_dir));
  if (spec.kind == DatasetKind::mnist_subset)
    data.train = subset(data.train, spec.subset_size, config.seed);
  return train_on(config, data.train, data.test);
}

GradientCheck gradient_check(int width, std::uint64_t seed, bool classification, double h) {
  constexpr int in = 6;
  constexpr int batch = 5;
  const int out = classification ? 3 : 1;
  auto rng = stream(seed, 7);
  Mlp<double> net = init_mlp<double>(in, width, out, rng);
  std::normal_distribution<double> normal(0.0, 0.5);
  for (Eigen::Index i = 0; i < net.b1.size(); ++i) net.b1(i) = normal(rng);
  for (Eigen::Index i = 0; i < net.b2.size(); ++i) net.b2(i) = normal(rng);
  Batch<double> b;
  b.x = Eigen::MatrixXd::NullaryExpr(in, batch, [&] { return normal(rng) + 0.5; });
  if (classification) {
    std::uniform_int_distribution<int> cls(0, out - 1);
    for (int j = 0; j < batch; ++j) b.labels.push_back(cls(rng));
  } else {
    b.targets = Eigen::VectorXd::NullaryExpr(batch, [&] { return normal(rng); });
  }
  Mlp<double> grad = net;
  evaluate(net, b, classification, 0.0, &grad);

  std::vector<double*> params;
  std::vector<double> analytic;
  const auto collect = [&](auto& p, auto& g) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      params.push_back(p.data() + i);
      analytic.push_back(g.data()[i]);
    }
  };
  collect(net.w1, grad.w1);
  collect(net.b1, grad.b1);
  collect(net.w2, grad.w2);
  collect(net.b2, grad.b2);

  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  GradientCheck result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = *params[k];
    *params[k] = saved + h;
    const double up = evaluate(net, b, classification, 0.0, static_cast<Mlp<double>*>(nullptr)).loss;
    *params[k] = saved - h;
    const double down = evaluate(net, b, classification, 0.0, static_cast<Mlp<double>*>(nullptr)).loss;
    *params[k] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double d = analytic[k] - numeric;
    diff2 += d * d;
    a2 += analytic[k] * analytic[k];
    n2 += numeric * numeric;
    result.max_abs_error = std::max(result.max_abs_error, std::abs(d));
  }
  const double denom = std::sqrt(a2) + std::sqrt(n2);
  result.relative_error = denom > 0.0 ? std::sqrt(diff2) / denom : 0.0;
  result.parameters = params.size();
  return result;
}

}  // namespace densecap
