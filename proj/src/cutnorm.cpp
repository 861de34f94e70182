#include "densecap/cutnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "densecap/error.hpp"
#include "densecap/parallel.hpp"

namespace densecap {

const char* to_string(CutOracle oracle) {
  switch (oracle) {
    case CutOracle::exact: return "exact";
    case CutOracle::heuristic: return "heuristic";
    case CutOracle::certified: return "certified";
  }
  return "?";
}

CutOracle parse_cut_oracle(const std::string& name) {
  if (name == "exact") return CutOracle::exact;
  if (name == "heuristic") return CutOracle::heuristic;
  if (name == "certified") return CutOracle::certified;
  throw Error(ErrorKind::parameter, "unknown cut oracle '" + name +
                                        "' (expected exact, heuristic or certified)");
}

const char* to_string(AlignMode mode) {
  switch (mode) {
    case AlignMode::identity: return "identity";
    case AlignMode::greedy: return "greedy";
    case AlignMode::exhaustive: return "exhaustive";
  }
  return "?";
}

AlignMode parse_align_mode(const std::string& name) {
  if (name == "identity") return AlignMode::identity;
  if (name == "greedy") return AlignMode::greedy;
  if (name == "exhaustive") return AlignMode::exhaustive;
  throw Error(ErrorKind::parameter, "unknown alignment mode '" + name +
                                        "' (expected identity, greedy or exhaustive)");
}

CutWitness signal_cut_norm(const Eigen::VectorXd& values, const Eigen::VectorXd& mu) {
  if (values.size() != mu.size())
    throw Error(ErrorKind::dimension, "signal values and measures differ in length");
  long double pos = 0.0L, neg = 0.0L;
  std::vector<int> pos_set, neg_set;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const long double mass = static_cast<long double>(values(i)) * mu(i);
    if (mass > 0) {
      pos += mass;
      pos_set.push_back(static_cast<int>(i));
    } else if (mass < 0) {
      neg -= mass;
      neg_set.push_back(static_cast<int>(i));
    }
  }
  CutWitness w;
  if (pos >= neg) {
    w.value = static_cast<double>(pos);
    w.row_set = std::move(pos_set);
  } else {
    w.value = static_cast<double>(neg);
    w.row_set = std::move(neg_set);
  }
  return w;
}

CutWitness signal_cut_norm(const StepSignal& f) {
  return signal_cut_norm(f.values(), f.partition().measures());
}

double evaluate_cut(const MeasuredMatrix& m, const std::vector<int>& rows,
                    const std::vector<int>& cols) {
  long double total = 0.0L;
  for (int i : rows) {
    long double row = 0.0L;
    for (int j : cols) row += static_cast<long double>(m.values(i, j)) * m.col_measure(j);
    total += row * m.row_measure(i);
  }
  return static_cast<double>(std::fabs(total));
}

double evaluate_signal_cut(const StepSignal& f, const std::vector<int>& set) {
  const Eigen::VectorXd mu = f.partition().measures();
  long double total = 0.0L;
  for (int i : set) total += static_cast<long double>(f.values()(i)) * mu(i);
  return static_cast<double>(std::fabs(total));
}

namespace {

/// Matrix with zero rows/columns removed and identical ones merged.
struct Reduced {
  Eigen::MatrixXd v;
  Eigen::VectorXd mu;
  Eigen::VectorXd nu;
  std::vector<std::vector<int>> row_groups;  // original indices per reduced row
  std::vector<std::vector<int>> col_groups;
};

/// Group identical nonzero rows of v (restricted to the listed columns).
std::vector<std::vector<int>> group_rows(const Eigen::MatrixXd& v,
                                         const Eigen::VectorXd& weight,
                                         const std::vector<int>& rows,
                                         const std::vector<int>& cols) {
  std::map<std::vector<double>, std::size_t> index;
  std::vector<std::vector<int>> groups;
  std::vector<double> key(cols.size());
  for (int i : rows) {
    if (!(weight(i) > 0)) continue;
    bool nonzero = false;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      key[c] = v(i, cols[c]) + 0.0;  // folds -0.0 into +0.0
      nonzero = nonzero || key[c] != 0.0;
    }
    if (!nonzero) continue;
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

Reduced reduce(const MeasuredMatrix& m) {
  std::vector<int> all_rows(static_cast<std::size_t>(m.values.rows()));
  std::vector<int> all_cols(static_cast<std::size_t>(m.values.cols()));
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::iota(all_cols.begin(), all_cols.end(), 0);
  Reduced r;
  r.row_groups = group_rows(m.values, m.row_measure, all_rows, all_cols);
  std::vector<int> reps;
  for (const auto& g : r.row_groups) reps.push_back(g.front());
  const Eigen::MatrixXd vt = m.values.transpose();
  r.col_groups = group_rows(vt, m.col_measure, all_cols, reps);
  const auto R = static_cast<Eigen::Index>(r.row_groups.size());
  const auto C = static_cast<Eigen::Index>(r.col_groups.size());
  r.v.resize(R, C);
  r.mu = Eigen::VectorXd::Zero(R);
  r.nu = Eigen::VectorXd::Zero(C);
  for (Eigen::Index a = 0; a < R; ++a)
    for (int i : r.row_groups[a]) r.mu(a) += m.row_measure(i);
  for (Eigen::Index b = 0; b < C; ++b)
    for (int j : r.col_groups[b]) r.nu(b) += m.col_measure(j);
  for (Eigen::Index a = 0; a < R; ++a)
    for (Eigen::Index b = 0; b < C; ++b)
      r.v(a, b) = m.values(r.row_groups[a].front(), r.col_groups[b].front());
  return r;
}

std::vector<int> expand(const std::vector<std::vector<int>>& groups,
                        const std::vector<int>& chosen) {
  std::vector<int> out;
  for (int g : chosen) out.insert(out.end(), groups[g].begin(), groups[g].end());
  std::sort(out.begin(), out.end());
  return out;
}

/// Witness on the reduced matrix (rows x cols of r.v).
struct ReducedWitness {
  double value = 0.0;
  std::vector<int> rows;
  std::vector<int> cols;
};

CutWitness lift(const MeasuredMatrix& m, const Reduced& r, const ReducedWitness& w) {
  CutWitness out;
  out.row_set = expand(r.row_groups, w.rows);
  out.col_set = expand(r.col_groups, w.cols);
  out.value = evaluate_cut(m, out.row_set, out.col_set);
  return out;
}

/// Best column set for fixed row sums s: returns value and sign.
inline double best_columns(const Eigen::VectorXd& s, const Eigen::VectorXd& nu, int& sign) {
  double pos = 0.0, neg = 0.0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const double t = s(j) * nu(j);
    if (t > 0) pos += t;
    else neg -= t;
  }
  sign = pos >= neg ? 1 : -1;
  return std::max(pos, neg);
}

ReducedWitness exact_reduced(const Eigen::MatrixXd& v, const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& nu) {
  const int m = static_cast<int>(v.rows());
  ReducedWitness best;
  if (m == 0 || v.cols() == 0) return best;
  const int prefix_bits = std::min(m, 6);
  const int low_bits = m - prefix_bits;
  const std::size_t blocks = std::size_t{1} << prefix_bits;
  // weighted rows: w_i = v_i mu_i
  const Eigen::MatrixXd w = mu.asDiagonal() * v;

  struct BlockBest {
    double value = -1.0;
    std::uint64_t mask = 0;
  };
  std::vector<BlockBest> results(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    std::uint64_t mask = static_cast<std::uint64_t>(b) << low_bits;
    auto resync = [&](std::uint64_t msk) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(v.cols());
      for (int i = 0; i < m; ++i)
        if (msk >> i & 1U) s += w.row(i).transpose();
      return s;
    };
    Eigen::VectorXd s = resync(mask);
    BlockBest local;
    const std::uint64_t steps = std::uint64_t{1} << low_bits;
    for (std::uint64_t g = 0; g < steps; ++g) {
      if (g > 0) {
        const int bit = __builtin_ctzll(g);
        mask ^= std::uint64_t{1} << bit;
        if ((g & 4095U) == 0) {
          s = resync(mask);
        } else if (mask >> bit & 1U) {
          s += w.row(bit).transpose();
        } else {
          s -= w.row(bit).transpose();
        }
      }
      int sign = 1;
      const double value = best_columns(s, nu, sign);
      if (value > local.value) {
        local.value = value;
        local.mask = mask;
      }
    }
    results[b] = local;
  });
  BlockBest top = results.front();
  for (const auto& r : results)
    if (r.value > top.value) top = r;
  // rebuild the witness from the winning mask
  Eigen::VectorXd s = Eigen::VectorXd::Zero(v.cols());
  for (int i = 0; i < m; ++i)
    if (top.mask >> i & 1U) {
      best.rows.push_back(i);
      s += w.row(i).transpose();
    }
  int sign = 1;
  best.value = best_columns(s, nu, sign);
  for (Eigen::Index j = 0; j < s.size(); ++j)
    if (sign * s(j) > 0) best.cols.push_back(static_cast<int>(j));
  return best;
}

}  // namespace

int reduced_dimension(const MeasuredMatrix& m) {
  const Reduced r = reduce(m);
  return static_cast<int>(std::min(r.v.rows(), r.v.cols()));
}

CutWitness kernel_cut_norm_exact(const MeasuredMatrix& m, int cap) {
  const Reduced r = reduce(m);
  const int dim = static_cast<int>(std::min(r.v.rows(), r.v.cols()));
  if (dim > cap || dim > 62)
    throw Error(ErrorKind::capacity,
                "exact cut norm needs 2^" + std::to_string(dim) +
                    " subsets (cap " + std::to_string(cap) +
                    "); use the heuristic or certified oracle");
  ReducedWitness w;
  if (r.v.rows() <= r.v.cols()) {
    w = exact_reduced(r.v, r.mu, r.nu);
  } else {
    ReducedWitness t = exact_reduced(r.v.transpose(), r.nu, r.mu);
    w.value = t.value;
    w.rows = std::move(t.cols);
    w.cols = std::move(t.rows);
  }
  return lift(m, r, w);
}

CutWitness kernel_cut_norm_exact(const StepKernel& k, int cap) {
  return kernel_cut_norm_exact(MeasuredMatrix::of(k), cap);
}

CutWitness kernel_cut_norm_lower(const MeasuredMatrix& m, int restarts,
                                 std::uint64_t seed) {
  const Reduced r = reduce(m);
  const Eigen::Index R = r.v.rows();
  const Eigen::Index C = r.v.cols();
  ReducedWitness best;
  if (R == 0 || C == 0) return lift(m, r, best);
  const Eigen::MatrixXd w = r.mu.asDiagonal() * r.v * r.nu.asDiagonal();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int restart = 0; restart < std::max(1, restarts); ++restart) {
    Eigen::VectorXd start(R);
    for (Eigen::Index i = 0; i < R; ++i) start(i) = restart == 0 ? 1.0 : (coin(rng) ? 1.0 : 0.0);
    for (int sign : {1, -1}) {
      Eigen::VectorXd rows = start;
      Eigen::VectorXd cols(C);
      double value = -std::numeric_limits<double>::infinity();
      for (int iter = 0; iter < 200; ++iter) {
        const Eigen::VectorXd colsum = w.transpose() * rows;
        for (Eigen::Index j = 0; j < C; ++j) cols(j) = sign * colsum(j) > 0 ? 1.0 : 0.0;
        const Eigen::VectorXd rowsum = w * cols;
        for (Eigen::Index i = 0; i < R; ++i) rows(i) = sign * rowsum(i) > 0 ? 1.0 : 0.0;
        const double next = sign * rows.dot(rowsum);
        if (!(next > value + 1e-15)) {
          value = std::max(value, next);
          break;
        }
        value = next;
      }
      if (value > best.value) {
        best.value = value;
        best.rows.clear();
        best.cols.clear();
        for (Eigen::Index i = 0; i < R; ++i)
          if (rows(i) > 0) best.rows.push_back(static_cast<int>(i));
        for (Eigen::Index j = 0; j < C; ++j)
          if (cols(j) > 0) best.cols.push_back(static_cast<int>(j));
      }
    }
  }
  return lift(m, r, best);
}

CutWitness kernel_cut_norm_lower(const StepKernel& k, int restarts, std::uint64_t seed) {
  return kernel_cut_norm_lower(MeasuredMatrix::of(k), restarts, seed);
}

double kernel_cut_norm_upper(const MeasuredMatrix& m) {
  const Reduced r = reduce(m);
  if (r.v.size() == 0) return 0.0;
  long double pos = 0.0L, neg = 0.0L;
  for (Eigen::Index a = 0; a < r.v.rows(); ++a)
    for (Eigen::Index b = 0; b < r.v.cols(); ++b) {
      const long double t = static_cast<long double>(r.v(a, b)) * r.mu(a) * r.nu(b);
      if (t > 0) pos += t;
      else neg -= t;
    }
  const double mass_bound = static_cast<double>(std::max(pos, neg));
  const Eigen::VectorXd smu = r.mu.cwiseSqrt();
  const Eigen::VectorXd snu = r.nu.cwiseSqrt();
  const Eigen::MatrixXd scaled = smu.asDiagonal() * r.v * snu.asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled);
  const double sigma = svd.singularValues()(0);
  const double spectral = sigma * std::sqrt(r.mu.sum() * r.nu.sum());
  // widen by a relative margin covering the rounding of both computations
  const double margin = 1e-12;
  return std::min(mass_bound, spectral) * (1.0 + margin) + 1e-300;
}

CutEstimate kernel_cut_norm(const MeasuredMatrix& m, CutOracle oracle,
                            const CutOptions& options) {
  CutEstimate e;
  const bool fits = reduced_dimension(m) <= options.cap;
  if (oracle == CutOracle::exact || (oracle == CutOracle::certified && fits)) {
    e.witness = kernel_cut_norm_exact(m, options.cap);
    e.lower = e.upper = e.witness.value;
    e.exact = true;
    return e;
  }
  e.witness = kernel_cut_norm_lower(m, options.restarts, options.seed);
  e.lower = e.witness.value;
  e.upper = std::max(kernel_cut_norm_upper(m), e.lower);
  return e;
}

double l1_norm(const MeasuredMatrix& m) {
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j)
      total += std::fabs(static_cast<long double>(m.values(i, j))) * m.row_measure(i) *
               m.col_measure(j);
  return static_cast<double>(total);
}

double l2_norm(const MeasuredMatrix& m) {
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      const long double v = m.values(i, j);
      total += v * v * m.row_measure(i) * m.col_measure(j);
    }
  return static_cast<double>(std::sqrt(total));
}

double l1_norm(const StepKernel& k) { return l1_norm(MeasuredMatrix::of(k)); }
double l2_norm(const StepKernel& k) { return l2_norm(MeasuredMatrix::of(k)); }

double l1_norm(const StepSignal& f) {
  const Eigen::VectorXd mu = f.partition().measures();
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    total += std::fabs(static_cast<long double>(f.values()(i))) * mu(i);
  return static_cast<double>(total);
}

double l2_norm(const StepSignal& f) {
  const Eigen::VectorXd mu = f.partition().measures();
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const long double v = f.values()(i);
    total += v * v * mu(i);
  }
  return static_cast<double>(std::sqrt(total));
}

Eigen::MatrixXd permute_blocks(const Eigen::MatrixXd& j, const std::vector<int>& perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) out(a, b) = j(perm[a], perm[b]);
  return out;
}

namespace {

struct DistanceProbe {
  const Eigen::MatrixXd& k;
  const Eigen::MatrixXd& j;
  Eigen::VectorXd mu;
  CutOracle oracle;
  CutOptions options;

  CutEstimate operator()(const std::vector<int>& perm) const {
    MeasuredMatrix m{k - permute_blocks(j, perm), mu, mu};
    return kernel_cut_norm(m, oracle, options);
  }
};

}  // namespace

DistanceEstimate comp_cut_distance_upper(const ComputationalKernel& k,
                                         const ComputationalKernel& j,
                                         AlignMode mode, CutOracle oracle,
                                         const CutOptions& options,
                                         std::size_t max_relabelings) {
  if (!(k.layers() == j.layers()) || k.bound() != j.bound())
    throw Error(ErrorKind::parameter,
                "computational cut distance needs kernels with equal (L, d0, dL, d, B)");
  const LayerStructure& s = k.layers();
  const int n = s.n();
  const int d = s.d;
  DistanceProbe probe{k.kernel().coeffs(), j.kernel().coeffs(),
                      Eigen::VectorXd::Constant(n, 1.0 / n), oracle, options};

  std::vector<int> identity(static_cast<std::size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  DistanceEstimate best;
  {
    const CutEstimate e = probe(identity);
    best.upper = e.upper;
    best.exact_cut_norms = e.exact;
    best.permutation = identity;
    best.explored = 1;
  }
  if (mode == AlignMode::identity) return best;

  if (mode == AlignMode::exhaustive) {
    if (d > 8)
      throw Error(ErrorKind::capacity,
                  "exhaustive alignment needs d <= 8, got d = " + std::to_string(d));
    std::size_t per_layer = 1;
    for (int t = 2; t <= d; ++t) per_layer *= static_cast<std::size_t>(t);
    std::size_t total = 1;
    for (int l = 1; l < s.L; ++l) {
      if (total > max_relabelings / per_layer)
        throw Error(ErrorKind::capacity,
                    "exhaustive alignment would explore more than " +
                        std::to_string(max_relabelings) + " relabelings");
      total *= per_layer;
    }
    // all permutations of one layer, in lexicographic order
    std::vector<std::vector<int>> layer_perms;
    std::vector<int> p(static_cast<std::size_t>(d));
    std::iota(p.begin(), p.end(), 0);
    do layer_perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));

    std::vector<CutEstimate> results(total);
    auto relabeling = [&](std::size_t code) {
      std::vector<int> perm = identity;
      for (int l = 1; l < s.L; ++l) {
        const auto& lp = layer_perms[code % per_layer];
        code /= per_layer;
        for (int i = 0; i < d; ++i) perm[l * d + i] = l * d + lp[i];
      }
      return perm;
    };
    parallel_for(total, [&](std::size_t code) { results[code] = probe(relabeling(code)); });
    best.explored = total;
    bool all_exact = true;
    std::size_t arg = 0;
    for (std::size_t code = 0; code < total; ++code) {
      all_exact = all_exact && results[code].exact;
      if (results[code].upper < results[arg].upper) arg = code;
    }
    best.exact_cut_norms = all_exact;
    if (results[arg].upper < best.upper) {
      best.upper = results[arg].upper;
      best.permutation = relabeling(arg);
    }
    return best;
  }

  // greedy: layer by layer, match K's parts to J's parts by incoming profile
  const Eigen::MatrixXd& kc = k.kernel().coeffs();
  const Eigen::MatrixXd& jc = j.kernel().coeffs();
  const int bias0 = s.layer_begin(s.bias_layer());
  std::vector<int> perm = identity;
  for (int l = 1; l < s.L; ++l) {
    std::vector<bool> used(static_cast<std::size_t>(d), false);
    for (int a = 0; a < d; ++a) {
      const int row = l * d + a;
      int choice = -1;
      double choice_dist = std::numeric_limits<double>::infinity();
      for (int b = 0; b < d; ++b) {
        if (used[static_cast<std::size_t>(b)]) continue;
        const int jrow = l * d + b;
        double dist = std::abs(kc(row, bias0) - jc(jrow, bias0));
        for (int c = s.layer_begin(l - 1); c < s.layer_end(l - 1); ++c)
          dist += std::abs(kc(row, c) - jc(jrow, perm[c]));
        if (dist < choice_dist) {
          choice_dist = dist;
          choice = b;
        }
      }
      used[static_cast<std::size_t>(choice)] = true;
      perm[row] = l * d + choice;
    }
  }
  const CutEstimate e = probe(perm);
  best.explored = 2;
  best.exact_cut_norms = best.exact_cut_norms && e.exact;
  if (e.upper < best.upper) {
    best.upper = e.upper;
    best.permutation = perm;
  }
  return best;
}

}  // namespace densecap
