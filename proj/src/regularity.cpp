#include "densecap/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "densecap/error.hpp"

namespace densecap {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::below_epsilon: return "below-epsilon";
    case Termination::heuristic: return "heuristic-termination";
    case Termination::iteration_cap: return "iteration-cap";
    case Termination::stalled: return "stalled";
    case Termination::budget: return "budget";
  }
  return "?";
}

namespace {

Eigen::MatrixXd clamp_unit(Eigen::MatrixXd m) { return m.cwiseMax(-1.0).cwiseMin(1.0); }

/// Averages of `values` (weighted by mu) over class blocks.
Eigen::MatrixXd block_averages(const Eigen::MatrixXd& values, const Eigen::VectorXd& mu,
                               const std::vector<int>& classes, int count) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(count, values.rows());
  for (Eigen::Index i = 0; i < values.rows(); ++i) h(classes[static_cast<std::size_t>(i)], i) = mu(i);
  const Eigen::VectorXd mass = h.rowwise().sum();
  Eigen::MatrixXd sums = h * values * h.transpose();
  for (int a = 0; a < count; ++a)
    for (int b = 0; b < count; ++b) sums(a, b) /= mass(a) * mass(b);
  return sums;
}

}  // namespace

StepKernel project(const StepKernel& k, const Partition& p) {
  if (k.partition() == p) return k;
  const Partition q = common_refinement(k.partition(), p);
  const auto to_k = part_map(q, k.partition());
  const auto to_p = part_map(q, p);
  const Eigen::MatrixXd expanded = expand_blocks(k.coeffs(), to_k, to_k);
  Eigen::MatrixXd avg = block_averages(expanded, q.measures(), to_p, static_cast<int>(p.size()));
  return StepKernel(p, clamp_unit(std::move(avg)));
}

Eigen::MatrixXd class_averages(const StepKernel& k, const std::vector<int>& classes,
                               int class_count) {
  if (classes.size() != k.size())
    throw Error(ErrorKind::dimension, "need one class per kernel part");
  return clamp_unit(block_averages(k.coeffs(), k.partition().measures(), classes, class_count));
}

std::vector<int> canonical_classes(const std::vector<int>& classes, int* count) {
  std::map<int, int> index;
  std::vector<int> out(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    auto [it, inserted] = index.emplace(classes[i], static_cast<int>(index.size()));
    out[i] = it->second;
  }
  if (count) *count = static_cast<int>(index.size());
  return out;
}

std::vector<int> intersect_classes(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::dimension, "class vectors differ in length");
  std::map<std::pair<int, int>, int> index;
  std::vector<int> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it, inserted] = index.emplace(std::make_pair(a[i], b[i]), static_cast<int>(index.size()));
    out[i] = it->second;
  }
  return out;
}

RegularityTrace weak_regularity(const StepKernel& k, double epsilon,
                                const RegularityOptions& options) {
  if (!(epsilon > 0.0 && epsilon <= 2.0))
    throw Error(ErrorKind::parameter, "epsilon must lie in (0, 2]");
  const std::size_t n = k.size();
  const Eigen::VectorXd mu = k.partition().measures();
  int count = 1;
  std::vector<int> classes(n, 0);
  if (!options.initial_classes.empty()) {
    if (options.initial_classes.size() != n)
      throw Error(ErrorKind::dimension, "initial classes need one entry per part");
    classes = canonical_classes(options.initial_classes, &count);
  }
  RegularityTrace trace;
  trace.iteration_cap = options.max_iterations >= 0
                            ? options.max_iterations
                            : static_cast<long long>(std::ceil(4.0 / (epsilon * epsilon)));
  Eigen::MatrixXd avg;
  for (int t = 0;; ++t) {
    avg = class_averages(k, classes, count);
    const Eigen::MatrixXd lifted = expand_blocks(avg, classes, classes);
    const Eigen::VectorXd mass = [&] {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(count);
      for (std::size_t i = 0; i < n; ++i) m(classes[i]) += mu(static_cast<Eigen::Index>(i));
      return m;
    }();
    double energy = 0.0;
    for (int a = 0; a < count; ++a)
      for (int b = 0; b < count; ++b) energy += avg(a, b) * avg(a, b) * mass(a) * mass(b);

    const MeasuredMatrix diff{k.coeffs() - lifted, mu, mu};
    const CutEstimate est = kernel_cut_norm(diff, options.oracle, options.cut);
    trace.steps.push_back({t, static_cast<std::size_t>(count), energy, est.witness.value,
                           est.upper, est.exact});
    trace.final_lower = est.lower;
    trace.final_upper = est.upper;

    if (est.upper < epsilon) {
      trace.termination = Termination::below_epsilon;
      break;
    }
    if (options.oracle == CutOracle::heuristic && est.lower < epsilon) {
      trace.termination = Termination::heuristic;
      break;
    }
    if (t >= trace.iteration_cap) {
      trace.termination = Termination::iteration_cap;
      break;
    }
    // refine every class by the witness sets S (rows) and T (columns)
    std::vector<int> key(n, 0);
    for (int i : est.witness.row_set) key[static_cast<std::size_t>(i)] |= 1;
    for (int j : est.witness.col_set) key[static_cast<std::size_t>(j)] |= 2;
    std::vector<int> combined(n);
    for (std::size_t i = 0; i < n; ++i) combined[i] = classes[i] * 4 + key[i];
    int next_count = 0;
    std::vector<int> next = canonical_classes(combined, &next_count);
    if (next_count == count) {
      trace.termination = Termination::stalled;
      break;
    }
    if (options.guard && !options.guard(next)) {
      trace.termination = Termination::budget;
      break;
    }
    classes = std::move(next);
    count = next_count;
  }
  trace.classes = classes;
  trace.partition = k.partition().relabel(classes);
  trace.kernel = StepKernel(trace.partition, avg);
  return trace;
}

std::vector<int> layer_respecting_classes(const LayerStructure& s) {
  std::vector<int> out(static_cast<std::size_t>(s.n()));
  for (int p = 0; p < s.n(); ++p) {
    const int l = s.layer_of(p);
    if (l == 0) out[p] = s.input_cell(p);
    else if (l < s.L) out[p] = s.d0 + l - 1;
    else if (l == s.L) out[p] = s.d0 + s.L - 1 + s.output_cell(p);
    else out[p] = s.d0 + s.L - 1 + s.dL;
  }
  return out;
}

std::vector<int> merge_cells(const std::vector<int>& classes, const LayerStructure& s) {
  std::map<std::pair<int, int>, int> index;
  std::vector<int> out(classes.size());
  for (int p = 0; p < s.n(); ++p) {
    const int l = s.layer_of(p);
    std::pair<int, int> key;
    if (l == 0) key = {0, s.input_cell(p)};
    else if (l == s.L) key = {2, s.output_cell(p)};
    else if (l == s.bias_layer()) key = {3, 0};
    else key = {1, classes[static_cast<std::size_t>(p)]};
    auto [it, inserted] = index.emplace(key, static_cast<int>(index.size()));
    out[static_cast<std::size_t>(p)] = it->second;
  }
  return canonical_classes(out);
}

LayerRegularity layer_respecting_regularity(const ComputationalKernel& k, double epsilon,
                                            const RegularityOptions& options) {
  const LayerStructure& s = k.layers();
  LayerRegularity out;
  out.trace = weak_regularity(k.kernel(), epsilon, options);
  out.before.lower = out.trace.final_lower;
  out.before.upper = out.trace.final_upper;
  out.before.exact = !out.trace.steps.empty() && out.trace.steps.back().exact;

  int count = 0;
  out.classes = canonical_classes(
      merge_cells(intersect_classes(out.trace.classes, layer_respecting_classes(s)), s), &count);
  out.partition = Partition::equipartition(s.n()).relabel(out.classes);
  const Eigen::MatrixXd avg = class_averages(k.kernel(), out.classes, count);
  out.kernel = StepKernel(out.partition, avg);
  const Eigen::VectorXd mu = k.kernel().partition().measures();
  const MeasuredMatrix diff{k.kernel().coeffs() - expand_blocks(avg, out.classes, out.classes), mu,
                            mu};
  out.after = kernel_cut_norm(diff, options.oracle, options.cut);
  return out;
}

Carving carve(const std::vector<std::vector<Segment>>& classes, int m) {
  if (m < 1) throw Error(ErrorKind::parameter, "carving needs m >= 1");
  std::int64_t total = 0;
  for (const auto& c : classes)
    for (const auto& seg : c) {
      if (seg.end <= seg.begin) throw Error(ErrorKind::parameter, "empty segment");
      total += seg.end - seg.begin;
    }
  Carving out;
  const std::int64_t chunk = total;  // on the grid scaled by m
  std::vector<Segment> current;
  std::int64_t filled = 0;
  std::vector<Segment> pool;

  auto take = [&](std::vector<Segment> source, int parent, std::vector<Segment>* leftover) {
    for (Segment seg : source) {
      seg.begin *= m;
      seg.end *= m;
      while (seg.begin < seg.end) {
        const std::int64_t room = chunk - filled;
        const std::int64_t len = std::min(room, seg.end - seg.begin);
        current.push_back({seg.begin, seg.begin + len});
        filled += len;
        seg.begin += len;
        if (filled == chunk) {
          out.chunks.push_back(std::move(current));
          out.parent.push_back(parent);
          current.clear();
          filled = 0;
        }
      }
    }
    if (leftover) {
      leftover->insert(leftover->end(), current.begin(), current.end());
      current.clear();
      filled = 0;
    }
  };
  for (std::size_t c = 0; c < classes.size(); ++c)
    take(classes[c], static_cast<int>(c), &pool);
  // pooled leftovers are already on the scaled grid
  for (const auto& seg : pool) {
    Segment s = seg;
    while (s.begin < s.end) {
      const std::int64_t len = std::min(chunk - filled, s.end - s.begin);
      current.push_back({s.begin, s.begin + len});
      filled += len;
      s.begin += len;
      if (filled == chunk) {
        out.chunks.push_back(std::move(current));
        out.parent.push_back(-1);
        current.clear();
        filled = 0;
        ++out.h;
      }
    }
  }
  if (static_cast<int>(out.chunks.size()) != m || filled != 0)
    throw Error(ErrorKind::parameter, "carving produced an inconsistent number of parts");
  return out;
}

EquitizeResult equitize(const Partition& p, int m) {
  if (m <= static_cast<int>(p.size()))
    throw Error(ErrorKind::parameter, "equitize needs m > |P| (m = " + std::to_string(m) +
                                          ", |P| = " + std::to_string(p.size()) + ")");
  std::vector<std::vector<Segment>> classes(p.size());
  for (std::size_t part = 0; part < p.size(); ++part)
    for (auto [a, b] : p.atoms_of(part)) classes[part].push_back({a, b});
  const Carving c = carve(classes, m);
  std::int64_t grid = 0;
  if (__builtin_mul_overflow(p.denominator(), static_cast<std::int64_t>(m), &grid))
    throw Error(ErrorKind::capacity, "equitizing grid overflows 64 bits");
  std::vector<std::tuple<std::int64_t, std::int64_t, int>> atoms;
  for (std::size_t k = 0; k < c.chunks.size(); ++k)
    for (const auto& seg : c.chunks[k]) atoms.emplace_back(seg.begin, seg.end, static_cast<int>(k));
  std::sort(atoms.begin(), atoms.end());
  std::vector<std::int64_t> cuts{0};
  std::vector<int> labels;
  for (const auto& [a, b, label] : atoms) {
    cuts.push_back(b);
    labels.push_back(label);
  }
  EquitizeResult r;
  r.partition = Partition::from_atoms(grid, std::move(cuts), std::move(labels));
  r.parent = c.parent;
  r.h = c.h;
  r.refinement_parts = m - c.h;
  return r;
}

std::vector<int> sort_to_intervals(const Partition& p) {
  if (!p.is_equipartition())
    throw Error(ErrorKind::parameter, "sort_to_intervals needs parts of equal measure");
  std::vector<int> perm(p.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::int64_t> left(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) left[i] = p.leftmost(i);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return left[a] < left[b]; });
  return perm;
}

std::vector<int> inverse_permutation(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size(), -1);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const int target = perm[i];
    if (target < 0 || static_cast<std::size_t>(target) >= perm.size() || inv[target] != -1)
      throw Error(ErrorKind::parameter, "not a permutation");
    inv[target] = static_cast<int>(i);
  }
  return inv;
}

StepKernel apply_layout(const StepKernel& k, const std::vector<int>& perm) {
  if (perm.size() != k.size()) throw Error(ErrorKind::dimension, "permutation size mismatch");
  inverse_permutation(perm);  // validates
  return StepKernel(Partition::equipartition(static_cast<std::int64_t>(perm.size())),
                    permute_blocks(k.coeffs(), perm));
}

}  // namespace densecap
