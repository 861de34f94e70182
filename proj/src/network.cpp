#include "densecap/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "densecap/error.hpp"
#include "densecap/textio.hpp"

namespace densecap {

int DenseNetwork::width(int layer) const {
  if (layer == 0) return input_dim;
  if (layer == depth) return output_dim;
  return hidden_dim;
}

double DenseNetwork::max_abs_parameter() const {
  double m = 0.0;
  for (const auto& w : weights)
    if (w.size() > 0) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : biases)
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

namespace {

std::string shape(long rows, long cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

void check_shape_metadata(int L, int d0, int dL, int d, double B) {
  if (L < 2)
    throw Error(ErrorKind::parameter,
                "depth L must be at least 2, got " + std::to_string(L));
  if (d0 < 1 || dL < 1 || d < 1)
    throw Error(ErrorKind::parameter, "dimensions must be positive");
  if (d % d0 != 0 || d % dL != 0)
    throw Error(ErrorKind::parameter,
                "hidden dimension " + std::to_string(d) +
                    " must be divisible by d0=" + std::to_string(d0) +
                    " and dL=" + std::to_string(dL));
  if (!(B > 0.0) || !std::isfinite(B))
    throw Error(ErrorKind::invalid_bound, "bound B must be a positive real");
}

}  // namespace

void validate_network(const DenseNetwork& net) {
  check_shape_metadata(net.depth, net.input_dim, net.output_dim,
                       net.hidden_dim, net.bound);
  if (static_cast<int>(net.weights.size()) != net.depth ||
      static_cast<int>(net.biases.size()) != net.depth)
    throw Error(ErrorKind::dimension,
                "expected " + std::to_string(net.depth) +
                    " weight matrices and bias vectors");
  for (int l = 1; l <= net.depth; ++l) {
    const auto& w = net.weights[l - 1];
    const auto& b = net.biases[l - 1];
    if (w.rows() != net.width(l) || w.cols() != net.width(l - 1))
      throw Error(ErrorKind::dimension,
                  "layer " + std::to_string(l) + " weight: expected " +
                      shape(net.width(l), net.width(l - 1)) + ", got " +
                      shape(w.rows(), w.cols()));
    if (b.size() != net.width(l))
      throw Error(ErrorKind::dimension,
                  "layer " + std::to_string(l) + " bias: expected length " +
                      std::to_string(net.width(l)) + ", got " +
                      std::to_string(b.size()));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        if (!(std::abs(w(i, j)) <= net.bound))
          throw Error(ErrorKind::invalid_bound,
                      "W" + std::to_string(l) + "[" + std::to_string(i) +
                          "," + std::to_string(j) + "] = " +
                          textio::format_real(w(i, j)) + " exceeds B = " +
                          textio::format_real(net.bound));
    for (Eigen::Index i = 0; i < b.size(); ++i)
      if (!(std::abs(b(i)) <= net.bound))
        throw Error(ErrorKind::invalid_bound,
                    "b" + std::to_string(l) + "[" + std::to_string(i) +
                        "] = " + textio::format_real(b(i)) +
                        " exceeds B = " + textio::format_real(net.bound));
  }
}

DenseNetwork make_network(int L, int d0, int dL, int d, double B,
                          std::vector<Eigen::MatrixXd> weights,
                          std::vector<Eigen::VectorXd> biases) {
  DenseNetwork net;
  net.depth = L;
  net.input_dim = d0;
  net.output_dim = dL;
  net.hidden_dim = d;
  net.bound = B;
  net.weights = std::move(weights);
  net.biases = std::move(biases);
  validate_network(net);
  return net;
}

DenseNetwork zero_network(int L, int d0, int dL, int d, double B) {
  check_shape_metadata(L, d0, dL, d, B);
  DenseNetwork net;
  net.depth = L;
  net.input_dim = d0;
  net.output_dim = dL;
  net.hidden_dim = d;
  net.bound = B;
  for (int l = 1; l <= L; ++l) {
    net.weights.push_back(Eigen::MatrixXd::Zero(net.width(l), net.width(l - 1)));
    net.biases.push_back(Eigen::VectorXd::Zero(net.width(l)));
  }
  return net;
}

DenseNetwork random_network(int L, int d0, int dL, int d, double B,
                            std::mt19937_64& rng) {
  DenseNetwork net = zero_network(L, d0, dL, d, B);
  std::uniform_real_distribution<double> u(-B, B);
  for (int l = 0; l < L; ++l) {
    for (Eigen::Index i = 0; i < net.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < net.weights[l].cols(); ++j)
        net.weights[l](i, j) = u(rng);
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i)
      net.biases[l](i) = u(rng);
  }
  return net;
}

std::vector<Eigen::VectorXd> forward_trace(const DenseNetwork& net,
                                           const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim)
    throw Error(ErrorKind::dimension,
                "layer 0 input: expected length " +
                    std::to_string(net.input_dim) + ", got " +
                    std::to_string(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!std::isfinite(x(i)))
      throw Error(ErrorKind::parameter, "input entry " + std::to_string(i) +
                                            " is not finite");
  const double depth_scale = net.depth + 2.0;
  std::vector<Eigen::VectorXd> trace;
  trace.reserve(net.depth + 1);
  trace.push_back(x);
  for (int l = 1; l <= net.depth; ++l) {
    const auto& w = net.weights[l - 1];
    const auto& b = net.biases[l - 1];
    const double fan_in = net.width(l - 1);
    if (w.cols() != trace.back().size() || w.rows() != b.size())
      throw Error(ErrorKind::dimension,
                  "layer " + std::to_string(l) + ": weight " +
                      shape(w.rows(), w.cols()) + " incompatible with input " +
                      std::to_string(trace.back().size()) + " and bias " +
                      std::to_string(b.size()));
    // sum_j (W_ij h_j + b_i) = (W h)_i + fan_in * b_i
    Eigen::VectorXd h = (w * trace.back() + fan_in * b) / (fan_in * depth_scale);
    if (l < net.depth) h = h.cwiseMax(0.0);
    trace.push_back(std::move(h));
  }
  return trace;
}

Eigen::VectorXd forward(const DenseNetwork& net, const Eigen::VectorXd& x) {
  return forward_trace(net, x).back();
}

DenseNetwork clamp_dense(const DenseNetwork& net, double B) {
  if (!(B > 0.0))
    throw Error(ErrorKind::invalid_bound, "clamp bound must be positive");
  DenseNetwork out = net;
  out.bound = B;
  for (auto& w : out.weights) w = w.cwiseMax(-B).cwiseMin(B);
  for (auto& b : out.biases) b = b.cwiseMax(-B).cwiseMin(B);
  return out;
}

std::uint64_t param_count(std::uint64_t L, std::uint64_t d0, std::uint64_t dL,
                          std::uint64_t d) {
  if (L < 1 || d0 < 1 || dL < 1 || d < 1)
    throw Error(ErrorKind::parameter, "param_count arguments must be >= 1");
  return (L - 1) * d * d + (d0 + dL + L - 1) * d + dL;
}

std::uint64_t count_parameters(const DenseNetwork& net) {
  std::uint64_t total = 0;
  for (std::size_t l = 0; l < net.weights.size(); ++l)
    total += static_cast<std::uint64_t>(net.weights[l].size() + net.biases[l].size());
  return total;
}

std::string serialize(const DenseNetwork& net) {
  std::ostringstream out;
  out << "densecap-net v1\n";
  out << net.depth << ' ' << net.input_dim << ' ' << net.output_dim << ' '
      << net.hidden_dim << ' ' << textio::format_real(net.bound) << '\n';
  for (int l = 1; l <= net.depth; ++l) {
    const auto& w = net.weights[l - 1];
    out << "W " << l << '\n';
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        out << (j ? " " : "") << textio::format_real(w(i, j));
      out << '\n';
    }
    const auto& b = net.biases[l - 1];
    out << "b " << l << '\n';
    for (Eigen::Index i = 0; i < b.size(); ++i)
      out << (i ? " " : "") << textio::format_real(b(i));
    out << '\n';
  }
  return out.str();
}

namespace {

[[noreturn]] void missing(const std::string& section) {
  throw Error(ErrorKind::parse, "truncated record: missing section '" +
                                    section + "'");
}

void expect_header(const textio::Line& line, const std::string& tag, int l) {
  if (line.fields.size() != 2 || line.fields[0] != tag ||
      textio::parse_int(line, 1) != l)
    throw Error(ErrorKind::parse, "line " + std::to_string(line.number) +
                                      ": expected section '" + tag + " " +
                                      std::to_string(l) + "'");
}

void read_row(const textio::Line& line, Eigen::Ref<Eigen::VectorXd> row,
              const std::string& section) {
  if (static_cast<Eigen::Index>(line.fields.size()) != row.size())
    throw Error(ErrorKind::parse,
                "line " + std::to_string(line.number) + " (section '" +
                    section + "'): expected " + std::to_string(row.size()) +
                    " values, got " + std::to_string(line.fields.size()));
  for (Eigen::Index j = 0; j < row.size(); ++j)
    row(j) = textio::parse_real(line, static_cast<std::size_t>(j));
}

}  // namespace

DenseNetwork deserialize(const std::string& text) {
  auto lines = textio::tokenize(text);
  std::size_t at = 0;
  if (lines.empty()) missing("densecap-net v1");
  if (lines[0].fields != std::vector<std::string>{"densecap-net", "v1"})
    throw Error(ErrorKind::parse, "line " + std::to_string(lines[0].number) +
                                      ": expected header 'densecap-net v1'");
  ++at;
  if (at >= lines.size()) missing("L d0 dL d B");
  const auto& meta = lines[at++];
  if (meta.fields.size() != 5)
    throw Error(ErrorKind::parse, "line " + std::to_string(meta.number) +
                                      ": expected 'L d0 dL d B'");
  const int L = static_cast<int>(textio::parse_int(meta, 0));
  const int d0 = static_cast<int>(textio::parse_int(meta, 1));
  const int dL = static_cast<int>(textio::parse_int(meta, 2));
  const int d = static_cast<int>(textio::parse_int(meta, 3));
  const double B = textio::parse_real(meta, 4);
  DenseNetwork net = zero_network(L, d0, dL, d, B);
  for (int l = 1; l <= L; ++l) {
    const std::string wname = "W " + std::to_string(l);
    if (at >= lines.size()) missing(wname);
    expect_header(lines[at++], "W", l);
    auto& w = net.weights[l - 1];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      if (at >= lines.size())
        missing(wname + " row " + std::to_string(i + 1));
      Eigen::VectorXd row(w.cols());
      read_row(lines[at++], row, wname);
      w.row(i) = row.transpose();
    }
    const std::string bname = "b " + std::to_string(l);
    if (at >= lines.size()) missing(bname);
    expect_header(lines[at++], "b", l);
    if (at >= lines.size()) missing(bname + " values");
    read_row(lines[at++], net.biases[l - 1], bname);
  }
  if (at != lines.size())
    throw Error(ErrorKind::parse, "line " + std::to_string(lines[at].number) +
                                      ": unexpected trailing content");
  validate_network(net);
  return net;
}

DenseNetwork load_network(const std::string& path) {
  return deserialize(textio::read_file(path));
}

void save_network(const DenseNetwork& net, const std::string& path) {
  textio::write_file(path, serialize(net));
}

}  // namespace densecap
