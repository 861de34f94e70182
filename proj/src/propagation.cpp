#include "densecap/propagation.hpp"

#include <algorithm>
#include <cmath>

#include "densecap/error.hpp"

namespace densecap {

std::vector<StepSignal> mpnn_trace(const StepKernel& k, const StepSignal& f,
                                   double B, int L) {
  if (L < 1) throw Error(ErrorKind::parameter, "MPNN needs at least one layer");
  Partition common = k.partition() == f.partition()
                         ? k.partition()
                         : common_refinement(k.partition(), f.partition());
  const StepKernel kc = k.partition() == common ? k : k.on(common);
  const StepSignal fc = f.partition() == common ? f : f.on(common);
  if (!(kc.partition() == fc.partition()))
    throw Error(ErrorKind::dimension, "kernel and signal partitions do not match");
  const Eigen::VectorXd mu = common.measures();
  std::vector<StepSignal> trace{fc};
  Eigen::VectorXd v = fc.values();
  for (int l = 1; l <= L; ++l) {
    Eigen::VectorXd next = B * (kc.coeffs() * mu.cwiseProduct(v));
    if (l < L) next = next.cwiseMax(0.0);
    v = next;
    trace.emplace_back(common, v);
  }
  return trace;
}

StepSignal mpnn_forward(const StepKernel& k, const StepSignal& f, double B, int L) {
  return mpnn_trace(k, f, B, L).back();
}

Eigen::VectorXd readout(const StepSignal& out, const LayerStructure& s, double tol) {
  const Partition cells = s.output_cells();
  const auto map = part_map(out.partition(), cells);  // throws if not refining
  const int first_cell = s.L * s.dL;
  Eigen::VectorXd result(s.dL);
  std::vector<bool> seen(static_cast<std::size_t>(s.dL), false);
  for (std::size_t p = 0; p < map.size(); ++p) {
    const int cell = map[p] - first_cell;
    if (cell < 0 || cell >= s.dL) continue;
    const double v = out.values()(static_cast<Eigen::Index>(p));
    if (!seen[static_cast<std::size_t>(cell)]) {
      result(cell) = v;
      seen[static_cast<std::size_t>(cell)] = true;
    } else if (std::abs(result(cell) - v) > tol) {
      throw Error(ErrorKind::equivalence,
                  "output cell " + std::to_string(cell) +
                      " is not constant (values differ by " +
                      std::to_string(std::abs(result(cell) - v)) + ")");
    }
  }
  return result;
}

double bias_deviation(const StepSignal& f, const LayerStructure& s) {
  const auto map = part_map(f.partition(), s.layer_partition());
  double dev = 0.0;
  for (std::size_t p = 0; p < map.size(); ++p)
    if (map[p] == s.bias_layer())
      dev = std::max(dev, std::abs(f.values()(static_cast<Eigen::Index>(p)) - 1.0));
  return dev;
}

std::vector<Eigen::VectorXd> sr_mpnn_trace(const ComputationalGraph& g,
                                           const Eigen::VectorXd& features, int L) {
  const Eigen::Index n = g.adjacency.rows();
  if (features.size() != n)
    throw Error(ErrorKind::dimension, "features need length " + std::to_string(n) +
                                          ", got " + std::to_string(features.size()));
  if (L < 1) throw Error(ErrorKind::parameter, "MPNN needs at least one round");
  std::vector<Eigen::VectorXd> trace{features};
  for (int l = 1; l <= L; ++l) {
    Eigen::VectorXd next = g.adjacency * trace.back() / static_cast<double>(n);
    if (l < L) next = next.cwiseMax(0.0);
    trace.push_back(std::move(next));
  }
  return trace;
}

Eigen::VectorXd sr_mpnn_forward(const ComputationalGraph& g,
                                const Eigen::VectorXd& features, int L) {
  return sr_mpnn_trace(g, features, L).back();
}

Eigen::VectorXd graph_readout(const ComputationalGraph& g,
                              const Eigen::VectorXd& features, double tol) {
  const LayerStructure& s = g.layers;
  Eigen::VectorXd result(s.dL);
  std::vector<bool> seen(static_cast<std::size_t>(s.dL), false);
  for (int v = 0; v < s.n(); ++v) {
    if (g.vertex_layer[v] != s.L) continue;
    const int cell = g.vertex_cell[v];
    if (!seen[static_cast<std::size_t>(cell)]) {
      result(cell) = features(v);
      seen[static_cast<std::size_t>(cell)] = true;
    } else if (std::abs(result(cell) - features(v)) > tol) {
      throw Error(ErrorKind::equivalence,
                  "output cell " + std::to_string(cell) + " differs across vertices");
    }
  }
  return result;
}

EquivalenceReport check_equivalence(const DenseNetwork& net,
                                    const Eigen::VectorXd& x, double tolerance) {
  EquivalenceReport r;
  r.tolerance = tolerance;
  r.network = forward(net, x);

  const ComputationalKernel k = induce_kernel(net);
  const LayerStructure& s = k.layers();
  const auto ktrace =
      mpnn_trace(k.kernel(), induce_input_signal(x, s), net.bound, net.depth);
  r.kernel = readout(ktrace.back(), s);

  const ComputationalGraph g = induce_graph(net);
  const auto gtrace = sr_mpnn_trace(g, induce_graph_features(x, s), net.depth);
  r.graph = graph_readout(g, gtrace.back());

  for (const auto& f : ktrace) r.bias_deviation = std::max(r.bias_deviation, bias_deviation(f, s));
  for (const auto& f : gtrace)
    for (int v = 0; v < s.n(); ++v)
      if (g.vertex_layer[v] == s.bias_layer())
        r.bias_deviation = std::max(r.bias_deviation, std::abs(f(v) - 1.0));

  r.max_discrepancy = std::max({(r.network - r.kernel).cwiseAbs().maxCoeff(),
                                (r.network - r.graph).cwiseAbs().maxCoeff(),
                                (r.kernel - r.graph).cwiseAbs().maxCoeff()});
  r.pass = r.max_discrepancy <= tolerance;
  return r;
}

}  // namespace densecap
