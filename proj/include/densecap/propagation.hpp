#pragma once

#include <vector>

#include <Eigen/Dense>

#include "densecap/computational.hpp"
#include "densecap/step.hpp"

namespace densecap {

/// B-amplified integral-ReLU message passing on a step kernel-signal:
///   f^(l)_i = B ReLU( sum_j c_ij mu(P_j) f^(l-1)_j ),
/// the last of the L layers without ReLU. Kernel and signal are first moved
/// to their common refinement. Returns f^(0), ..., f^(L).
std::vector<StepSignal> mpnn_trace(const StepKernel& k, const StepSignal& f,
                                   double B, int L);

/// Final layer of mpnn_trace.
StepSignal mpnn_forward(const StepKernel& k, const StepSignal& f, double B,
                        int L);

/// Value of an output signal on each output cell; throws an equivalence
/// Error when the signal varies inside a cell by more than `tol`.
Eigen::VectorXd readout(const StepSignal& out, const LayerStructure& layers,
                        double tol = 1e-10);

/// Largest |f - 1| over the bias layer.
double bias_deviation(const StepSignal& f, const LayerStructure& layers);

/// Sum-ReLU message passing on a graph:
///   f^(l)(i) = ReLU( (1/n) sum_j A_ij f^(l-1)(j) ),
/// the last of the L rounds without ReLU. Returns all L+1 feature vectors.
std::vector<Eigen::VectorXd> sr_mpnn_trace(const ComputationalGraph& g,
                                           const Eigen::VectorXd& features,
                                           int L);
Eigen::VectorXd sr_mpnn_forward(const ComputationalGraph& g,
                                const Eigen::VectorXd& features, int L);

/// Value of final graph features on each output cell (constancy enforced).
Eigen::VectorXd graph_readout(const ComputationalGraph& g,
                              const Eigen::VectorXd& features,
                              double tol = 1e-10);

/// Three evaluations of one network on one input.
struct EquivalenceReport {
  Eigen::VectorXd network;  ///< forward(net, x)
  Eigen::VectorXd kernel;   ///< induce -> mpnn_forward -> readout
  Eigen::VectorXd graph;    ///< induce_graph -> sr_mpnn_forward -> readout
  double max_discrepancy = 0.0;
  double bias_deviation = 0.0;  ///< max over layers and both MPNN paths
  double tolerance = 0.0;
  bool pass = false;
};

EquivalenceReport check_equivalence(const DenseNetwork& net,
                                    const Eigen::VectorXd& x,
                                    double tolerance = 1e-9);

}  // namespace densecap
