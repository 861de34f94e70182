#pragma once

#include <cstdint>
#include <vector>

#include "densecap/computational.hpp"
#include "densecap/step.hpp"

namespace densecap {

/// A cut value together with the part sets attaining it.
/// For signals col_set is empty.
struct CutWitness {
  double value = 0.0;
  std::vector<int> row_set;
  std::vector<int> col_set;
};

/// How kernel cut norms are obtained.
///   exact      enumerate unions of parts; refuses sizes beyond the cap
///   heuristic  alternating local search; a lower bound only
///   certified  exact when within the cap, otherwise a provable upper bound
///              (min of the positive/negative mass and a spectral bound)
///              paired with a heuristic lower bound and witness
enum class CutOracle { exact, heuristic, certified };

const char* to_string(CutOracle oracle);
CutOracle parse_cut_oracle(const std::string& name);

struct CutOptions {
  int cap = 24;               ///< max enumerated dimension after reduction
  int restarts = 32;          ///< heuristic restarts
  std::uint64_t seed = 0;     ///< heuristic seed
};

/// Lower and upper bound with the best witness found.
struct CutEstimate {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;
  CutWitness witness;
};

/// ||f||_□ = max(sum of positive masses, -sum of negative masses).
CutWitness signal_cut_norm(const StepSignal& f);
CutWitness signal_cut_norm(const Eigen::VectorXd& values, const Eigen::VectorXd& measures);

/// |sum_{i in rows, j in cols} v_ij mu_i nu_j| accumulated in long double.
double evaluate_cut(const MeasuredMatrix& m, const std::vector<int>& rows,
                    const std::vector<int>& cols);
double evaluate_signal_cut(const StepSignal& f, const std::vector<int>& set);

/// Exact kernel cut norm. Zero rows/columns are dropped and identical
/// rows/columns merged before enumerating subsets of the smaller side; the
/// other side is chosen in closed form. Throws capacity Error when the
/// reduced smaller side exceeds `cap`.
CutWitness kernel_cut_norm_exact(const MeasuredMatrix& m, int cap = 24);
CutWitness kernel_cut_norm_exact(const StepKernel& k, int cap = 24);

/// Alternating-maximization lower bound; deterministic for a given seed.
CutWitness kernel_cut_norm_lower(const MeasuredMatrix& m, int restarts = 32,
                                 std::uint64_t seed = 0);
CutWitness kernel_cut_norm_lower(const StepKernel& k, int restarts = 32,
                                 std::uint64_t seed = 0);

/// Provable upper bound: min( max(positive mass, negative mass),
/// sigma_max(diag(sqrt mu) V diag(sqrt nu)) sqrt(sum mu sum nu) ).
double kernel_cut_norm_upper(const MeasuredMatrix& m);

/// Dispatch on the oracle kind.
CutEstimate kernel_cut_norm(const MeasuredMatrix& m, CutOracle oracle,
                            const CutOptions& options = {});

/// Size of the smaller side after the exact algorithm's reduction.
int reduced_dimension(const MeasuredMatrix& m);

double l1_norm(const MeasuredMatrix& m);
double l2_norm(const MeasuredMatrix& m);
double l1_norm(const StepKernel& k);
double l2_norm(const StepKernel& k);
double l1_norm(const StepSignal& f);
double l2_norm(const StepSignal& f);

/// Search space for hidden-part relabelings.
enum class AlignMode { identity, greedy, exhaustive };
const char* to_string(AlignMode mode);
AlignMode parse_align_mode(const std::string& name);

/// Upper bound on the computational cut distance.
struct DistanceEstimate {
  double upper = 0.0;             ///< min over explored relabelings of the cut bound
  bool exact_cut_norms = false;   ///< every cut norm evaluated exactly
  std::vector<int> permutation;   ///< best relabeling of J's parts (size n)
  std::size_t explored = 0;       ///< relabelings evaluated
};

/// min over explored layer-preserving part permutations phi of
/// ||K - J^phi||_□. Only hidden layers are permuted; the input, output and
/// bias layers stay fixed. Exhaustive search needs d <= 8 and at most
/// `max_relabelings` combinations.
DistanceEstimate comp_cut_distance_upper(const ComputationalKernel& k,
                                         const ComputationalKernel& j,
                                         AlignMode mode,
                                         CutOracle oracle = CutOracle::certified,
                                         const CutOptions& options = {},
                                         std::size_t max_relabelings = 1000000);

/// J with parts relabeled: result(i, k) = J(perm[i], perm[k]).
Eigen::MatrixXd permute_blocks(const Eigen::MatrixXd& j, const std::vector<int>& perm);

}  // namespace densecap
