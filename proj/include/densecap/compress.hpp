#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "densecap/computational.hpp"
#include "densecap/cutnorm.hpp"
#include "densecap/network.hpp"
#include "densecap/regularity.hpp"

namespace densecap {

struct CompressOptions {
  int target_d = 0;        ///< compressed hidden width (multiple of lcm(d0, dL))
  double epsilon = 0.0;    ///< alternatively: cut-norm accuracy of the refinement
  CutOracle oracle = CutOracle::certified;  ///< oracle driving the refinement
  CutOptions cut;          ///< cap / restarts / seed of the cut routines
  long long max_iterations = 64;  ///< refinement rounds (target mode)
  int samples = 10000;     ///< uniform inputs for the empirical output gap
  std::uint64_t seed = 0;  ///< sampling seed
};

struct CompressionReport {
  // shapes
  int L = 0, d0 = 0, dL = 0, d = 0, d_prime = 0;
  double B = 0.0;
  std::string mode;  ///< "target-d" or "epsilon"
  double epsilon = 0.0;
  // refinement stage
  std::vector<RegularityStep> steps;
  std::string termination;
  std::vector<int> classes_per_layer;     ///< layers 0..L and bias
  std::vector<int> remainders_per_layer;  ///< h of the equitizing step per layer
  // structure checks
  ValidationReport projected_validation;  ///< projected kernel at tolerance 1e-9
  ValidationReport final_validation;      ///< induced kernel of the result, exact
  bool roundtrip_exact = false;           ///< extract ∘ induce reproduces the result
  // cut distance between K and the relabeled compressed kernel
  double delta_lower = 0.0;
  double delta_upper = 0.0;  ///< δ̂
  bool delta_exact = false;
  double implied_bound = 0.0;  ///< (L+2) dL (2B)^L δ̂
  // measured output gap
  double empirical_max_gap = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  bool bound_holds = false;
  // theory
  std::string theoretical_hidden_dim_log2;  ///< compression width for ε = implied bound (or ε)
  std::vector<std::pair<std::string, double>> stage_seconds;
};

struct CompressionResult {
  DenseNetwork network;
  CompressionReport report;
};

/// Compress a dense network: induce its kernel, refine a partition of the
/// parts by cut witnesses (staying within the width budget), equitize every
/// layer to d' parts, project, lay the parts out as intervals and read off
/// the compressed network. Exactly one of target_d / epsilon must be set.
CompressionResult compress_network(const DenseNetwork& net, const CompressOptions& options);

/// JSON text of a report.
std::string report_json(const CompressionReport& report);

}  // namespace densecap
