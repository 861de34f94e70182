#include "densecap/computational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "densecap/error.hpp"
#include "densecap/textio.hpp"

namespace densecap {

namespace {

std::string block_name(int i, int j) {
  return "block (" + std::to_string(i) + "," + std::to_string(j) + ")";
}

/// True when the (row part, col part) block may be nonzero.
bool allowed_block(const LayerStructure& s, int i, int j) {
  const int li = s.layer_of(i);
  const int lj = s.layer_of(j);
  const int bias = s.bias_layer();
  if (li == bias) return lj == bias;
  if (li == 0) return false;
  if (lj == bias) return true;
  return lj == li - 1;
}

void fail(ConditionResult& r, int i, int j, const std::string& why) {
  if (!r.pass) return;  // keep the first violation
  r.pass = false;
  r.row_part = i;
  r.col_part = j;
  r.detail = block_name(i, j) + ": " + why;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

bool ValidationReport::ok() const { return failures() == 0; }

int ValidationReport::failures() const {
  int f = 0;
  for (const auto& c : conditions) f += c.pass ? 0 : 1;
  return f;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& c : conditions) {
    out << "condition " << c.condition << ": " << (c.pass ? "pass" : "FAIL");
    if (!c.pass) out << " (" << c.detail << ")";
    out << '\n';
  }
  return out.str();
}

ValidationReport validate_computational(const StepKernel& k,
                                        const LayerStructure& s, double B,
                                        double tol) {
  ValidationReport report;
  for (int c = 0; c < 4; ++c) report.conditions[c].condition = c + 1;
  auto& c1 = report.conditions[0];
  auto& c2 = report.conditions[1];
  auto& c3 = report.conditions[2];
  auto& c4 = report.conditions[3];

  const int n = s.n();
  if (n % (s.M() * (s.L + 2)) != 0) {
    c1.pass = false;
    c1.detail = "n = " + std::to_string(n) + " not divisible by M(L+2)";
  } else if (!(k.partition() == Partition::equipartition(n))) {
    c1.pass = false;
    c1.detail = "partition is not the interval equipartition I_" + std::to_string(n);
  }
  if (!c1.pass) {
    for (auto* c : {&c2, &c3, &c4}) {
      c->pass = false;
      c->detail = "not evaluated (condition 1 failed)";
    }
    return report;
  }
  const Eigen::MatrixXd& c = k.coeffs();
  const int d = s.d;
  const int bias0 = s.layer_begin(s.bias_layer());

  // condition 2: constancy on the allowed region
  for (int i = s.layer_begin(1); i < s.layer_end(1); ++i)
    for (int j = 0; j < d; ++j) {
      const int first = (j / s.parts_per_input_cell()) * s.parts_per_input_cell();
      if (!close(c(i, j), c(i, first), tol))
        fail(c2, i, j, "not constant along input cell " + std::to_string(s.input_cell(j)));
    }
  for (int i = s.layer_begin(s.L); i < s.layer_end(s.L); ++i) {
    const int first = s.layer_begin(s.L) + s.output_cell(i) * s.parts_per_output_cell();
    for (int j = 0; j < n; ++j) {
      const int lj = s.layer_of(j);
      if (lj != s.L - 1 && lj != s.bias_layer()) continue;
      if (!close(c(i, j), c(first, j), tol))
        fail(c2, i, j, "not constant along output cell " + std::to_string(s.output_cell(i)));
    }
  }
  for (int i = s.layer_begin(1); i < s.layer_end(s.L); ++i)
    for (int j = bias0; j < n; ++j)
      if (!close(c(i, j), c(i, bias0), tol))
        fail(c2, i, j, "bias columns differ");

  // condition 3: zero pattern
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!allowed_block(s, i, j) && !close(c(i, j), 0.0, tol))
        fail(c3, i, j, "must be zero (layer " + std::to_string(s.layer_of(i)) +
                           " from layer " + std::to_string(s.layer_of(j)) + ")");

  // condition 4: bias block
  if (B < s.L + 2) {
    c4.pass = false;
    c4.detail = "B = " + textio::format_real(B) + " < L+2 makes (L+2)/B exceed 1";
  } else {
    const double expected = (s.L + 2.0) / B;
    for (int i = bias0; i < n; ++i)
      for (int j = bias0; j < n; ++j)
        if (!close(c(i, j), expected, tol))
          fail(c4, i, j, "bias block is " + textio::format_real(c(i, j)) +
                             ", expected (L+2)/B = " + textio::format_real(expected));
  }
  return report;
}

namespace {

/// Double w nearest c B with fl(w / B) == c and |w| <= B.
double recover(double c, double B) {
  double w = c * B;
  if (w > B) w = B;
  if (w < -B) w = -B;
  if (w / B == c) return w;
  for (int step = 1; step <= 64; ++step) {
    double up = w, down = w;
    for (int s = 0; s < step; ++s) {
      up = std::nextafter(up, INFINITY);
      down = std::nextafter(down, -INFINITY);
    }
    if (std::abs(up) <= B && up / B == c) return up;
    if (std::abs(down) <= B && down / B == c) return down;
  }
  throw Error(ErrorKind::parameter,
              "coefficient " + textio::format_real(c) +
                  " is not representable as w/B for B = " + textio::format_real(B));
}

void require_valid(const StepKernel& k, const LayerStructure& s, double B) {
  auto report = validate_computational(k, s, B, 0.0);
  if (!report.ok())
    throw Error(ErrorKind::validation,
                "kernel is not computational:\n" + report.summary());
}

}  // namespace

ComputationalKernel::ComputationalKernel(LayerStructure layers, double B,
                                         Eigen::MatrixXd A, StepKernel k)
    : layers_(layers), bound_(B), params_(std::move(A)), kernel_(std::move(k)) {}

ComputationalKernel ComputationalKernel::from_parameters(const LayerStructure& s,
                                                         double B,
                                                         Eigen::MatrixXd A) {
  const int n = s.n();
  if (A.rows() != n || A.cols() != n)
    throw Error(ErrorKind::dimension, "parameter matrix must be " +
                                          std::to_string(n) + "x" + std::to_string(n));
  if (!(B > 0.0)) throw Error(ErrorKind::invalid_bound, "B must be positive");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(std::abs(A(i, j)) <= B))
        throw Error(ErrorKind::invalid_bound, "parameter at " + block_name(i, j) +
                                                  " exceeds B = " + textio::format_real(B));
  StepKernel k(Partition::equipartition(n), A / B);
  require_valid(k, s, B);
  return ComputationalKernel(s, B, std::move(A), std::move(k));
}

ComputationalKernel ComputationalKernel::from_kernel(const LayerStructure& s,
                                                     double B,
                                                     const StepKernel& k) {
  require_valid(k, s, B);
  const int n = s.n();
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = recover(k.coeffs()(i, j), B);
  return ComputationalKernel(s, B, std::move(A), k);
}

ComputationalKernel induce_kernel(const DenseNetwork& net) {
  validate_network(net);
  const int L = net.depth;
  const double B = net.bound;
  if (B < L + 2)
    throw Error(ErrorKind::invalid_bound,
                "B = " + textio::format_real(B) + " < L+2 = " + std::to_string(L + 2) +
                    ": the bias block (L+2)/B would exceed 1");
  LayerStructure s(L, net.input_dim, net.output_dim, net.hidden_dim);
  const int n = s.n();
  const int d = s.d;
  const int bias0 = s.layer_begin(s.bias_layer());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);

  // first layer: each input cell column block repeats W^(1)_{:,j}
  const int in_w = s.parts_per_input_cell();
  for (int j = 0; j < s.d0; ++j)
    A.block(s.layer_begin(1), j * in_w, d, in_w) =
        net.weights[0].col(j).replicate(1, in_w);
  // hidden-to-hidden layers
  for (int l = 2; l < L; ++l)
    A.block(s.layer_begin(l), s.layer_begin(l - 1), d, d) = net.weights[l - 1];
  // last layer: each output cell row block repeats W^(L)_{i,:}
  const int out_w = s.parts_per_output_cell();
  for (int i = 0; i < s.dL; ++i)
    A.block(s.layer_begin(L) + i * out_w, s.layer_begin(L - 1), out_w, d) =
        net.weights[L - 1].row(i).replicate(out_w, 1);
  // bias columns
  for (int l = 1; l < L; ++l)
    A.block(s.layer_begin(l), bias0, d, d) = net.biases[l - 1].replicate(1, d);
  for (int i = 0; i < s.dL; ++i)
    A.block(s.layer_begin(L) + i * out_w, bias0, out_w, d).setConstant(net.biases[L - 1](i));
  A.block(bias0, bias0, d, d).setConstant(L + 2.0);

  return ComputationalKernel::from_parameters(s, B, std::move(A));
}

StepSignal induce_input_signal(const Eigen::VectorXd& x, const LayerStructure& s) {
  if (x.size() != s.d0)
    throw Error(ErrorKind::dimension, "input signal needs length d0 = " +
                                          std::to_string(s.d0) + ", got " +
                                          std::to_string(x.size()));
  const int cells = (s.L + 2) * s.d0;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(cells);
  v.head(s.d0) = x;
  v.tail(s.d0).setOnes();  // the bias layer spans the last d0 cells
  return StepSignal(s.input_cells(), std::move(v));
}

DenseNetwork extract_network(const ComputationalKernel& k) {
  const LayerStructure& s = k.layers();
  const Eigen::MatrixXd& A = k.parameters();
  const int L = s.L;
  const int d = s.d;
  const int bias0 = s.layer_begin(s.bias_layer());
  DenseNetwork net = zero_network(L, s.d0, s.dL, d, k.bound());
  for (int j = 0; j < s.d0; ++j)
    net.weights[0].col(j) = A.block(s.layer_begin(1), j * s.parts_per_input_cell(), d, 1);
  for (int l = 2; l < L; ++l)
    net.weights[l - 1] = A.block(s.layer_begin(l), s.layer_begin(l - 1), d, d);
  for (int i = 0; i < s.dL; ++i) {
    const int row = s.layer_begin(L) + i * s.parts_per_output_cell();
    net.weights[L - 1].row(i) = A.block(row, s.layer_begin(L - 1), 1, d);
    net.biases[L - 1](i) = A(row, bias0);
  }
  for (int l = 1; l < L; ++l)
    net.biases[l - 1] = A.block(s.layer_begin(l), bias0, d, 1);
  validate_network(net);
  return net;
}

DenseNetwork extract_network(const StepKernel& k, const LayerStructure& s,
                             double B, double tol) {
  auto report = validate_computational(k, s, B, tol);
  if (!report.ok())
    throw Error(ErrorKind::validation,
                "kernel is not computational:\n" + report.summary());
  const int n = s.n();
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      A(i, j) = std::clamp(B * k.coeffs()(i, j), -B, B);
  // snap the entries the conditions pin exactly
  const int bias0 = s.layer_begin(s.bias_layer());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!allowed_block(s, i, j)) A(i, j) = 0.0;
  A.block(bias0, bias0, s.d, s.d).setConstant(s.L + 2.0);
  // read parameters from representative entries
  const int L = s.L;
  const int d = s.d;
  DenseNetwork net = zero_network(L, s.d0, s.dL, d, B);
  for (int j = 0; j < s.d0; ++j)
    net.weights[0].col(j) = A.block(s.layer_begin(1), j * s.parts_per_input_cell(), d, 1);
  for (int l = 2; l < L; ++l)
    net.weights[l - 1] = A.block(s.layer_begin(l), s.layer_begin(l - 1), d, d);
  for (int i = 0; i < s.dL; ++i) {
    const int row = s.layer_begin(L) + i * s.parts_per_output_cell();
    net.weights[L - 1].row(i) = A.block(row, s.layer_begin(L - 1), 1, d);
    net.biases[L - 1](i) = A(row, bias0);
  }
  for (int l = 1; l < L; ++l)
    net.biases[l - 1] = A.block(s.layer_begin(l), bias0, d, 1);
  validate_network(net);
  return net;
}

ComputationalGraph induce_graph(const DenseNetwork& net) {
  validate_network(net);
  ComputationalGraph g;
  g.layers = LayerStructure(net.depth, net.input_dim, net.output_dim, net.hidden_dim);
  g.bound = net.bound;
  const LayerStructure& s = g.layers;
  const int n = s.n();
  const int L = s.L;
  const int d = s.d;
  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  g.vertex_layer.resize(n);
  g.vertex_cell.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    g.vertex_layer[v] = v / d;
    if (g.vertex_layer[v] == 0) g.vertex_cell[v] = v / (d / s.d0);
    if (g.vertex_layer[v] == L) g.vertex_cell[v] = (v - L * d) / (d / s.dL);
  }
  const int bias = L + 1;
  for (int v = 0; v < n; ++v) {
    const int lv = g.vertex_layer[v];
    const int iv = v - lv * d;  // position inside its layer
    for (int u = 0; u < n; ++u) {
      const int lu = g.vertex_layer[u];
      const int iu = u - lu * d;
      double a = 0.0;
      if (lv == bias && lu == bias) {
        a = L + 2.0;
      } else if (lv >= 1 && lv <= L && lu == bias) {
        a = lv == L ? net.biases[L - 1](g.vertex_cell[v]) : net.biases[lv - 1](iv);
      } else if (lv == 1 && lu == 0) {
        a = net.weights[0](iv, g.vertex_cell[u]);
      } else if (lv == L && lu == L - 1) {
        a = net.weights[L - 1](g.vertex_cell[v], iu);
      } else if (lv >= 2 && lv < L && lu == lv - 1) {
        a = net.weights[lv - 1](iv, iu);
      }
      g.adjacency(v, u) = a;
    }
  }
  return g;
}

Eigen::VectorXd induce_graph_features(const Eigen::VectorXd& x,
                                      const LayerStructure& s) {
  if (x.size() != s.d0)
    throw Error(ErrorKind::dimension, "input features need length d0 = " +
                                          std::to_string(s.d0));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(s.n());
  for (int v = 0; v < s.d; ++v) f(v) = x(s.input_cell(v));
  f.tail(s.d).setOnes();
  return f;
}

StepKernel graph_to_kernel(const ComputationalGraph& g, double B) {
  const Eigen::Index n = g.adjacency.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (!(std::abs(g.adjacency(i, j)) <= B))
        throw Error(ErrorKind::invalid_bound,
                    "edge weight at " + block_name(static_cast<int>(i), static_cast<int>(j)) +
                        " exceeds B = " + textio::format_real(B));
  return StepKernel(Partition::equipartition(n), g.adjacency / B);
}

std::string serialize_kernel(const ComputationalKernel& k) {
  const LayerStructure& s = k.layers();
  std::ostringstream out;
  out << "densecap-kernel v1\n";
  out << s.n() << ' ' << s.L << ' ' << s.d0 << ' ' << s.dL << ' '
      << textio::format_real(k.bound()) << '\n';
  const Eigen::MatrixXd& c = k.kernel().coeffs();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j)
      out << (j ? " " : "") << textio::format_real(c(i, j));
    out << '\n';
  }
  return out.str();
}

ComputationalKernel deserialize_kernel(const std::string& text) {
  auto lines = textio::tokenize(text);
  if (lines.empty() ||
      lines[0].fields != std::vector<std::string>{"densecap-kernel", "v1"})
    throw Error(ErrorKind::parse, "line 1: expected header 'densecap-kernel v1'");
  if (lines.size() < 2)
    throw Error(ErrorKind::parse, "truncated record: missing section 'n L d0 dL B'");
  const auto& meta = lines[1];
  if (meta.fields.size() != 5)
    throw Error(ErrorKind::parse, "line " + std::to_string(meta.number) +
                                      ": expected 'n L d0 dL B'");
  const auto n = textio::parse_int(meta, 0);
  const int L = static_cast<int>(textio::parse_int(meta, 1));
  const int d0 = static_cast<int>(textio::parse_int(meta, 2));
  const int dL = static_cast<int>(textio::parse_int(meta, 3));
  const double B = textio::parse_real(meta, 4);
  if (n < 1 || n % (L + 2) != 0)
    throw Error(ErrorKind::parse, "line " + std::to_string(meta.number) +
                                      ": n must be a positive multiple of L+2");
  LayerStructure s(L, d0, dL, static_cast<int>(n / (L + 2)));
  if (static_cast<long long>(lines.size()) != n + 2)
    throw Error(ErrorKind::parse, "expected " + std::to_string(n) +
                                      " coefficient rows, got " +
                                      std::to_string(lines.size() - 2));
  Eigen::MatrixXd c(n, n);
  for (long long i = 0; i < n; ++i) {
    const auto& line = lines[static_cast<std::size_t>(i + 2)];
    if (static_cast<long long>(line.fields.size()) != n)
      throw Error(ErrorKind::parse, "line " + std::to_string(line.number) +
                                        ": expected " + std::to_string(n) + " values");
    for (long long j = 0; j < n; ++j)
      c(i, j) = textio::parse_real(line, static_cast<std::size_t>(j));
  }
  return ComputationalKernel::from_kernel(s, B, StepKernel(Partition::equipartition(n), c));
}

ComputationalKernel load_kernel(const std::string& path) {
  return deserialize_kernel(textio::read_file(path));
}

void save_kernel(const ComputationalKernel& k, const std::string& path) {
  textio::write_file(path, serialize_kernel(k));
}

std::string serialize_signal(const StepSignal& f) {
  if (!f.partition().is_sorted_interval() || !f.partition().is_equipartition())
    throw Error(ErrorKind::parameter, "only interval equipartition signals can be written");
  std::ostringstream out;
  out << "densecap-signal v1\n" << f.size() << '\n';
  for (Eigen::Index i = 0; i < f.values().size(); ++i)
    out << (i ? " " : "") << textio::format_real(f.values()(i));
  out << '\n';
  return out.str();
}

StepSignal deserialize_signal(const std::string& text) {
  auto lines = textio::tokenize(text);
  if (lines.empty() ||
      lines[0].fields != std::vector<std::string>{"densecap-signal", "v1"})
    throw Error(ErrorKind::parse, "line 1: expected header 'densecap-signal v1'");
  if (lines.size() < 3)
    throw Error(ErrorKind::parse, "truncated record: missing section 'values'");
  const auto n = textio::parse_int(lines[1], 0);
  if (n < 1 || static_cast<long long>(lines[2].fields.size()) != n)
    throw Error(ErrorKind::parse, "line " + std::to_string(lines[2].number) +
                                      ": expected " + std::to_string(n) + " values");
  Eigen::VectorXd v(n);
  for (long long i = 0; i < n; ++i) v(i) = textio::parse_real(lines[2], static_cast<std::size_t>(i));
  return StepSignal(Partition::equipartition(n), std::move(v));
}

}  // namespace densecap
