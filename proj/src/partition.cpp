#include "densecap/partition.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "densecap/error.hpp"

namespace densecap {

std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
  const std::int64_t g = std::gcd(a, b);
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a / g, b, &out))
    throw Error(ErrorKind::capacity,
                "partition grid too fine: lcm(" + std::to_string(a) + ", " +
                    std::to_string(b) + ") overflows 64 bits");
  return out;
}

Partition::Partition() : denom_(1), cuts_{0, 1}, labels_{0}, mass_{1} {}

Partition Partition::equipartition(std::int64_t n) {
  if (n < 1) throw Error(ErrorKind::parameter, "equipartition needs n >= 1");
  Partition p;
  p.denom_ = n;
  p.cuts_.resize(static_cast<std::size_t>(n) + 1);
  std::iota(p.cuts_.begin(), p.cuts_.end(), std::int64_t{0});
  p.labels_.resize(static_cast<std::size_t>(n));
  std::iota(p.labels_.begin(), p.labels_.end(), 0);
  p.mass_.assign(static_cast<std::size_t>(n), 1);
  return p;
}

Partition Partition::from_atoms(std::int64_t denominator,
                                std::vector<std::int64_t> cuts,
                                std::vector<int> labels) {
  Partition p;
  p.denom_ = denominator;
  p.cuts_ = std::move(cuts);
  p.labels_ = std::move(labels);
  p.normalize();
  return p;
}

Partition Partition::from_weights(const std::vector<std::int64_t>& weights) {
  if (weights.empty())
    throw Error(ErrorKind::parameter, "partition needs at least one part");
  std::vector<std::int64_t> cuts{0};
  std::vector<int> labels;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0)
      throw Error(ErrorKind::parameter, "part " + std::to_string(i) +
                                            " has non-positive weight");
    cuts.push_back(cuts.back() + weights[i]);
    labels.push_back(static_cast<int>(i));
  }
  const std::int64_t total = cuts.back();
  return from_atoms(total, std::move(cuts), std::move(labels));
}

void Partition::normalize() {
  if (denom_ < 1) throw Error(ErrorKind::parameter, "denominator must be >= 1");
  if (cuts_.size() != labels_.size() + 1 || labels_.empty())
    throw Error(ErrorKind::parameter, "need one label per atom");
  if (cuts_.front() != 0 || cuts_.back() != denom_)
    throw Error(ErrorKind::parameter, "atoms must cover [0,1] exactly");
  for (std::size_t k = 0; k + 1 < cuts_.size(); ++k)
    if (cuts_[k] >= cuts_[k + 1])
      throw Error(ErrorKind::parameter,
                  "atom " + std::to_string(k) + " is empty or reversed");
  const int k_parts = *std::max_element(labels_.begin(), labels_.end()) + 1;
  if (*std::min_element(labels_.begin(), labels_.end()) < 0)
    throw Error(ErrorKind::parameter, "negative part label");
  // merge adjacent atoms with equal labels
  std::vector<std::int64_t> cuts{0};
  std::vector<int> labels;
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (!labels.empty() && labels.back() == labels_[k]) {
      cuts.back() = cuts_[k + 1];
    } else {
      labels.push_back(labels_[k]);
      cuts.push_back(cuts_[k + 1]);
    }
  }
  // reduce the grid
  std::int64_t g = denom_;
  for (auto c : cuts) g = std::gcd(g, c);
  for (auto& c : cuts) c /= g;
  denom_ /= g;
  cuts_ = std::move(cuts);
  labels_ = std::move(labels);
  mass_.assign(static_cast<std::size_t>(k_parts), 0);
  for (std::size_t k = 0; k < labels_.size(); ++k)
    mass_[static_cast<std::size_t>(labels_[k])] += cuts_[k + 1] - cuts_[k];
  for (std::size_t p = 0; p < mass_.size(); ++p)
    if (mass_[p] == 0)
      throw Error(ErrorKind::parameter,
                  "part " + std::to_string(p) + " has zero measure");
}

Measure Partition::measure(std::size_t part) const {
  const std::int64_t g = std::gcd(mass_.at(part), denom_);
  return {mass_[part] / g, denom_ / g};
}

Eigen::VectorXd Partition::measures() const {
  Eigen::VectorXd m(static_cast<Eigen::Index>(mass_.size()));
  for (std::size_t p = 0; p < mass_.size(); ++p)
    m(static_cast<Eigen::Index>(p)) =
        static_cast<double>(mass_[p]) / static_cast<double>(denom_);
  return m;
}

bool Partition::is_interval() const { return labels_.size() == mass_.size(); }

bool Partition::is_sorted_interval() const {
  if (!is_interval()) return false;
  for (std::size_t k = 0; k < labels_.size(); ++k)
    if (labels_[k] != static_cast<int>(k)) return false;
  return true;
}

bool Partition::is_equipartition() const {
  return std::all_of(mass_.begin(), mass_.end(),
                     [&](std::int64_t m) { return m == mass_.front(); });
}

std::int64_t Partition::leftmost(std::size_t part) const {
  for (std::size_t k = 0; k < labels_.size(); ++k)
    if (labels_[k] == static_cast<int>(part)) return cuts_[k];
  throw Error(ErrorKind::parameter, "no part " + std::to_string(part));
}

std::vector<std::pair<std::int64_t, std::int64_t>> Partition::atoms_of(
    std::size_t part) const {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::size_t k = 0; k < labels_.size(); ++k)
    if (labels_[k] == static_cast<int>(part)) out.emplace_back(cuts_[k], cuts_[k + 1]);
  return out;
}

Partition Partition::relabel(const std::vector<int>& new_label) const {
  if (new_label.size() != mass_.size())
    throw Error(ErrorKind::dimension, "relabel needs one label per part");
  std::vector<int> labels(labels_.size());
  for (std::size_t k = 0; k < labels_.size(); ++k)
    labels[k] = new_label[static_cast<std::size_t>(labels_[k])];
  return from_atoms(denom_, cuts_, std::move(labels));
}

Partition Partition::on_grid(std::int64_t denominator) const {
  if (denominator % denom_ != 0)
    throw Error(ErrorKind::parameter, "grid must be a multiple of the denominator");
  Partition p = *this;
  const std::int64_t f = denominator / denom_;
  for (auto& c : p.cuts_) c *= f;
  for (auto& m : p.mass_) m *= f;
  p.denom_ = denominator;
  return p;
}

std::string Partition::describe() const {
  std::ostringstream out;
  out << '{';
  for (std::size_t p = 0; p < mass_.size(); ++p) {
    out << (p ? " " : "") << p << ':';
    for (auto [a, b] : atoms_of(p))
      out << '[' << a << '/' << denom_ << ',' << b << '/' << denom_ << ')';
  }
  out << '}';
  return out.str();
}

namespace {

struct Overlay {
  std::int64_t denom = 1;
  std::vector<std::int64_t> cuts;
  std::vector<int> left;   // label in the first partition per atom
  std::vector<int> right;  // label in the second partition per atom
};

Overlay overlay(const Partition& p, const Partition& q) {
  Overlay o;
  o.denom = checked_lcm(p.denominator(), q.denominator());
  const std::int64_t fp = o.denom / p.denominator();
  const std::int64_t fq = o.denom / q.denominator();
  const auto& cp = p.cuts();
  const auto& cq = q.cuts();
  std::size_t i = 0, j = 0;
  o.cuts.push_back(0);
  while (i < p.atom_count() && j < q.atom_count()) {
    const std::int64_t ep = cp[i + 1] * fp;
    const std::int64_t eq = cq[j + 1] * fq;
    o.left.push_back(p.labels()[i]);
    o.right.push_back(q.labels()[j]);
    o.cuts.push_back(std::min(ep, eq));
    if (ep <= eq) ++i;
    if (eq <= ep) ++j;
  }
  return o;
}

}  // namespace

Partition common_refinement(const Partition& p, const Partition& q) {
  Overlay o = overlay(p, q);
  std::map<std::pair<int, int>, int> index;
  for (std::size_t k = 0; k < o.left.size(); ++k) index[{o.left[k], o.right[k]}] = 0;
  int next = 0;
  for (auto& entry : index) entry.second = next++;
  std::vector<int> labels(o.left.size());
  for (std::size_t k = 0; k < o.left.size(); ++k)
    labels[k] = index[{o.left[k], o.right[k]}];
  return Partition::from_atoms(o.denom, std::move(o.cuts), std::move(labels));
}

Partition refine(const Partition& p, const Partition& q) {
  return common_refinement(p, q);
}

bool is_refinement(const Partition& fine, const Partition& coarse) {
  Overlay o = overlay(fine, coarse);
  std::vector<int> target(fine.size(), -1);
  for (std::size_t k = 0; k < o.left.size(); ++k) {
    int& t = target[static_cast<std::size_t>(o.left[k])];
    if (t == -1) t = o.right[k];
    else if (t != o.right[k]) return false;
  }
  return true;
}

std::vector<int> part_map(const Partition& fine, const Partition& coarse) {
  Overlay o = overlay(fine, coarse);
  std::vector<int> target(fine.size(), -1);
  for (std::size_t k = 0; k < o.left.size(); ++k) {
    int& t = target[static_cast<std::size_t>(o.left[k])];
    if (t == -1) t = o.right[k];
    else if (t != o.right[k])
      throw Error(ErrorKind::parameter,
                  "part " + std::to_string(o.left[k]) +
                      " is not contained in a single coarse part");
  }
  return target;
}

}  // namespace densecap
