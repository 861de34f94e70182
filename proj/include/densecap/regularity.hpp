#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "densecap/computational.hpp"
#include "densecap/cutnorm.hpp"
#include "densecap/step.hpp"

namespace densecap {

/// Blockwise average of K over P_a x P_b, computed on the common
/// refinement of K's partition and P. Result lives on P.
StepKernel project(const StepKernel& k, const Partition& p);

/// Blockwise averages of a kernel over classes of its own parts:
/// result(a, b) = average of K over (class a) x (class b).
Eigen::MatrixXd class_averages(const StepKernel& k, const std::vector<int>& classes,
                               int class_count);

/// One refinement round of the cut-refinement procedure.
struct RegularityStep {
  int iteration = 0;
  std::size_t partition_size = 0;  ///< |P| before this round's refinement
  double energy = 0.0;             ///< ||K_P||_2^2
  double witness = 0.0;            ///< |∫_{S x T} (K - K_P)| of the found witness
  double cut_upper = 0.0;          ///< upper bound on ||K - K_P||_□
  bool exact = false;              ///< witness is the exact cut norm
};

enum class Termination {
  below_epsilon,   ///< certified ||K - K_P||_□ < ε
  heuristic,       ///< heuristic witness fell below ε (not certified)
  iteration_cap,   ///< ⌈4/ε²⌉ (or the configured) refinements used
  stalled,         ///< witness sets did not split any class
  budget,          ///< the refinement guard rejected the next partition
};
const char* to_string(Termination t);

struct RegularityOptions {
  CutOracle oracle = CutOracle::exact;
  CutOptions cut;
  /// Refinement cap; negative means ⌈4/ε²⌉.
  long long max_iterations = -1;
  /// Starting classes of K's parts (default: one class).
  std::vector<int> initial_classes;
  /// Called with a candidate class assignment; returning false stops the
  /// procedure before adopting it.
  std::function<bool(const std::vector<int>&)> guard;
};

struct RegularityTrace {
  std::vector<RegularityStep> steps;
  std::vector<int> classes;  ///< final class of every part of K
  Partition partition;       ///< final partition (classes as parts)
  StepKernel kernel;         ///< K projected onto `partition`
  Termination termination = Termination::below_epsilon;
  long long iteration_cap = 0;
  double final_lower = 0.0;  ///< bounds on ||K - K_P||_□ for the final P
  double final_upper = 0.0;

  RegularityTrace() : kernel(StepKernel::constant(0.0)) {}
};

/// Constructive weak regularity: repeatedly find S, T with large
/// |∫_{S x T}(K - K_P)|, refine P by S and T and re-project, until the cut
/// norm of K - K_P is below ε or the iteration cap is reached.
/// Requires ε in (0, 2].
RegularityTrace weak_regularity(const StepKernel& k, double epsilon,
                                const RegularityOptions& options = {});

/// Canonical class labels: renumber by first appearance.
std::vector<int> canonical_classes(const std::vector<int>& classes, int* count = nullptr);

/// Result of the layer-respecting refinement of a computational kernel.
struct LayerRegularity {
  RegularityTrace trace;       ///< the underlying cut-refinement run
  std::vector<int> classes;    ///< class of each part of I_n after refinement
  Partition partition;         ///< the layer-respecting partition P'
  StepKernel kernel;           ///< K projected onto P'
  CutEstimate before;          ///< ||K - K_P|| for the unrefined P
  CutEstimate after;           ///< ||K - K_P'||
  LayerRegularity() : kernel(StepKernel::constant(0.0)) {}
};

/// Run weak_regularity, refine by the layer-respecting partition (hidden
/// layers, bias, input cells, output cells), then give every input cell,
/// output cell and the bias layer a single class (the kernel is constant
/// across those parts, so the projection is unchanged) and re-project.
LayerRegularity layer_respecting_regularity(const ComputationalKernel& k,
                                            double epsilon,
                                            const RegularityOptions& options = {});

/// Classes of I_n's parts in the layer-respecting partition.
std::vector<int> layer_respecting_classes(const LayerStructure& layers);

/// Intersect two class assignments (lexicographic pair labels, canonical).
std::vector<int> intersect_classes(const std::vector<int>& a, const std::vector<int>& b);

/// Give every input cell, output cell and the bias layer one class each,
/// keeping the hidden-layer classes.
std::vector<int> merge_cells(const std::vector<int>& classes, const LayerStructure& layers);

/// Equitizing partition: m parts of equal measure, all but h of which lie
/// inside one part of P; the h remainder parts pool the leftovers.
struct EquitizeResult {
  Partition partition;       ///< m parts; refinement parts first, then remainders
  std::vector<int> parent;   ///< containing part of P, or -1 for a remainder
  int refinement_parts = 0;
  int h = 0;                 ///< number of remainder parts, h <= |P|
};

/// Requires m > |P|.
EquitizeResult equitize(const Partition& p, int m);

/// A piece [begin, end) of a grid, used by the carving routine.
struct Segment {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

/// Carve classes (each a list of segments on an integer grid, in order)
/// into m chunks of equal length on the grid multiplied by m. Chunks come
/// back as refinement chunks in class order followed by remainder chunks.
struct Carving {
  std::vector<std::vector<Segment>> chunks;  ///< on the grid scaled by m
  std::vector<int> parent;                   ///< class index or -1
  int h = 0;
};
Carving carve(const std::vector<std::vector<Segment>>& classes, int m);

/// Order in which equal-measure parts are laid out as consecutive
/// intervals: perm[k] is the part placed at position k (by leftmost point).
std::vector<int> sort_to_intervals(const Partition& p);

std::vector<int> inverse_permutation(const std::vector<int>& perm);

/// Kernel on P laid out on I_m: result(a, b) = c(perm[a], perm[b]).
StepKernel apply_layout(const StepKernel& k, const std::vector<int>& perm);

}  // namespace densecap
