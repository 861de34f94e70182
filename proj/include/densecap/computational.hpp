#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "densecap/layers.hpp"
#include "densecap/network.hpp"
#include "densecap/step.hpp"

namespace densecap {

/// Outcome of one structural condition of a computational kernel.
///   1: partition is I_n with n divisible by M (L+2), coefficients in [-1,1]
///   2: constancy along input-cell columns, output-cell rows, bias columns
///   3: zero outside the layer-successor pattern
///   4: bias block equals (L+2)/B
struct ConditionResult {
  int condition = 0;
  bool pass = true;
  std::string detail;
  int row_part = -1;  ///< first violating block, when applicable
  int col_part = -1;
};

struct ValidationReport {
  std::array<ConditionResult, 4> conditions;
  bool ok() const;
  int failures() const;
  std::string summary() const;
};

/// Check the four structural conditions; never throws on bad input.
/// Entries are compared with absolute tolerance `tol` (0 = exact).
ValidationReport validate_computational(const StepKernel& k,
                                        const LayerStructure& layers, double B,
                                        double tol = 0.0);

/// Kernel plus layer structure satisfying all four conditions.
///
/// Holds both the parameter-scale matrix A (entries in [-B, B]) and the
/// kernel c = A / B, so that networks round-trip bit-exactly.
class ComputationalKernel {
 public:
  /// From a parameter-scale block matrix on I_n; validated exactly.
  static ComputationalKernel from_parameters(const LayerStructure& layers,
                                             double B, Eigen::MatrixXd A);
  /// From kernel coefficients; validated exactly. Parameters are recovered
  /// as the double w closest to c B with fl(w / B) == c.
  static ComputationalKernel from_kernel(const LayerStructure& layers, double B,
                                         const StepKernel& k);

  const LayerStructure& layers() const { return layers_; }
  double bound() const { return bound_; }
  const StepKernel& kernel() const { return kernel_; }
  const Eigen::MatrixXd& parameters() const { return params_; }
  int size() const { return layers_.n(); }

 private:
  ComputationalKernel(LayerStructure layers, double B, Eigen::MatrixXd A,
                      StepKernel k);
  LayerStructure layers_;
  double bound_;
  Eigen::MatrixXd params_;
  StepKernel kernel_;
};

/// Kernel induced by network parameters (block assembly).
/// Throws invalid_bound when B < L+2.
ComputationalKernel induce_kernel(const DenseNetwork& net);

/// Induced input signal on I_{(L+2) d0}: x_j on input cell j, 1 on the
/// bias layer, 0 elsewhere.
StepSignal induce_input_signal(const Eigen::VectorXd& x,
                               const LayerStructure& layers);

/// Network that induces the kernel (exact inverse of induce_kernel).
DenseNetwork extract_network(const ComputationalKernel& k);

/// Network read off an approximately computational kernel: one
/// representative coefficient per parameter, scaled by B and clamped to
/// [-B, B]. Throws validation Error when the kernel fails a condition at
/// tolerance `tol`.
DenseNetwork extract_network(const StepKernel& k, const LayerStructure& layers,
                             double B, double tol);

/// Weighted-graph form of a network.
struct ComputationalGraph {
  LayerStructure layers;
  double bound = 0.0;
  Eigen::MatrixXd adjacency;      ///< n x n, entries in [-B, B]
  std::vector<int> vertex_layer;  ///< 0..L, bias = L+1
  std::vector<int> vertex_cell;   ///< input/output cell, -1 otherwise
};

/// Graph induced by network parameters (per-vertex rules).
ComputationalGraph induce_graph(const DenseNetwork& net);

/// Vertex features induced by an input: x_j on input cell j, 1 on bias.
Eigen::VectorXd induce_graph_features(const Eigen::VectorXd& x,
                                      const LayerStructure& layers);

/// Kernel K_G = sum_ij (A_ij / B) 1_{I_i x I_j}. Throws when |A| > B.
StepKernel graph_to_kernel(const ComputationalGraph& g, double B);

/// Kernel file: "densecap-kernel v1", "n L d0 dL B", n rows of n reals.
std::string serialize_kernel(const ComputationalKernel& k);
ComputationalKernel deserialize_kernel(const std::string& text);
ComputationalKernel load_kernel(const std::string& path);
void save_kernel(const ComputationalKernel& k, const std::string& path);

/// Signal file: "densecap-signal v1", "n", one row of n reals on I_n.
std::string serialize_signal(const StepSignal& f);
StepSignal deserialize_signal(const std::string& text);

}  // namespace densecap
