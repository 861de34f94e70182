#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace densecap {

/// Exact rational measure num/den (always stored reduced, den > 0).
struct Measure {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Measure&, const Measure&) = default;
};

/// A finite partition of [0,1] whose parts are finite unions of intervals
/// with rational endpoints.
///
/// The unit interval is cut into atoms [cuts[k], cuts[k+1]) / denominator;
/// every atom carries the index of the part it belongs to. Part indices are
/// kept exactly as supplied (they are the "labels" of the parts), so a
/// partition can describe parts that are not laid out left to right.
/// Measures are exact rationals and always sum to exactly 1.
class Partition {
 public:
  /// The trivial partition {[0,1]}.
  Partition();

  /// Interval equipartition I_n into n parts of measure 1/n, sorted.
  static Partition equipartition(std::int64_t n);

  /// General constructor. cuts must start at 0, end at denominator and be
  /// strictly increasing; labels has one entry per atom and must use every
  /// index in [0, k) for some k.
  static Partition from_atoms(std::int64_t denominator,
                              std::vector<std::int64_t> cuts,
                              std::vector<int> labels);

  /// Consecutive intervals with the given integer weights (measure
  /// weight_i / sum of weights), part i at position i.
  static Partition from_weights(const std::vector<std::int64_t>& weights);

  std::size_t size() const { return mass_.size(); }
  std::int64_t denominator() const { return denom_; }
  const std::vector<std::int64_t>& cuts() const { return cuts_; }
  const std::vector<int>& labels() const { return labels_; }
  std::size_t atom_count() const { return labels_.size(); }

  /// Exact measure of part p.
  Measure measure(std::size_t part) const;
  /// Numerator of the measure of part p over denominator().
  std::int64_t mass(std::size_t part) const { return mass_[part]; }
  /// Vector of part measures as doubles.
  Eigen::VectorXd measures() const;

  /// True when every part is a single interval.
  bool is_interval() const;
  /// True when every part is a single interval and part indices increase
  /// from left to right.
  bool is_sorted_interval() const;
  /// True when all parts have the same measure.
  bool is_equipartition() const;

  /// Left endpoint (numerator over denominator()) of the leftmost atom of p.
  std::int64_t leftmost(std::size_t part) const;
  /// Atoms of part p as [begin, end) numerators over denominator().
  std::vector<std::pair<std::int64_t, std::int64_t>> atoms_of(std::size_t part) const;

  /// Relabel: part p of this partition becomes part new_label[p] of the
  /// result (several parts may share a label, which merges them). The
  /// labels must cover [0, k).
  Partition relabel(const std::vector<int>& new_label) const;

  /// Re-express on a grid that is a multiple of the current denominator.
  Partition on_grid(std::int64_t denominator) const;

  /// Human readable description, e.g. "{0:[0,1/2) 1:[1/2,1)}".
  std::string describe() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  void normalize();

  std::int64_t denom_ = 1;
  std::vector<std::int64_t> cuts_;
  std::vector<int> labels_;
  std::vector<std::int64_t> mass_;
};

/// All nonempty pairwise intersections P_i ∩ Q_j, indexed in
/// lexicographic order of (i, j).
Partition common_refinement(const Partition& p, const Partition& q);

/// Refine P by Q; synonym for common_refinement kept for readability at
/// call sites that think of Q as the refining cut.
Partition refine(const Partition& p, const Partition& q);

/// True when every part of `fine` lies inside a single part of `coarse`.
bool is_refinement(const Partition& fine, const Partition& coarse);

/// For a refinement, the index of the coarse part containing each fine
/// part. Throws a parameter Error when `fine` does not refine `coarse`.
std::vector<int> part_map(const Partition& fine, const Partition& coarse);

/// Least common multiple with overflow detection.
std::int64_t checked_lcm(std::int64_t a, std::int64_t b);

}  // namespace densecap
