#include "densecap/step.hpp"

#include <cmath>

#include "densecap/error.hpp"

namespace densecap {

StepKernel::StepKernel(Partition partition, Eigen::MatrixXd coeffs)
    : partition_(std::move(partition)), coeffs_(std::move(coeffs)) {
  const auto n = static_cast<Eigen::Index>(partition_.size());
  if (coeffs_.rows() != n || coeffs_.cols() != n)
    throw Error(ErrorKind::dimension,
                "kernel coefficients must be " + std::to_string(n) + "x" +
                    std::to_string(n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (!(std::abs(coeffs_(i, j)) <= 1.0))
        throw Error(ErrorKind::parameter,
                    "kernel coefficient (" + std::to_string(i) + "," +
                        std::to_string(j) + ") outside [-1,1]");
}

StepKernel StepKernel::constant(double c) {
  return StepKernel(Partition(), Eigen::MatrixXd::Constant(1, 1, c));
}

Eigen::MatrixXd expand_blocks(const Eigen::MatrixXd& coarse,
                              const std::vector<int>& row_map,
                              const std::vector<int>& col_map) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(row_map.size()),
                      static_cast<Eigen::Index>(col_map.size()));
  for (std::size_t i = 0; i < row_map.size(); ++i)
    for (std::size_t j = 0; j < col_map.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          coarse(row_map[i], col_map[j]);
  return out;
}

StepKernel StepKernel::on(const Partition& finer) const {
  const auto map = part_map(finer, partition_);
  return StepKernel(finer, expand_blocks(coeffs_, map, map));
}

StepSignal::StepSignal(Partition partition, Eigen::VectorXd values)
    : partition_(std::move(partition)), values_(std::move(values)) {
  if (values_.size() != static_cast<Eigen::Index>(partition_.size()))
    throw Error(ErrorKind::dimension,
                "signal needs " + std::to_string(partition_.size()) +
                    " values, got " + std::to_string(values_.size()));
}

StepSignal StepSignal::on(const Partition& finer) const {
  const auto map = part_map(finer, partition_);
  Eigen::VectorXd v(static_cast<Eigen::Index>(map.size()));
  for (std::size_t i = 0; i < map.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = values_(map[i]);
  return StepSignal(finer, std::move(v));
}

MeasuredMatrix MeasuredMatrix::of(const StepKernel& k) {
  Eigen::VectorXd mu = k.partition().measures();
  return {k.coeffs(), mu, mu};
}

MeasuredMatrix MeasuredMatrix::difference(const StepKernel& k,
                                          const StepKernel& j) {
  if (k.partition() == j.partition()) {
    Eigen::VectorXd mu = k.partition().measures();
    return {k.coeffs() - j.coeffs(), mu, mu};
  }
  const Partition common = common_refinement(k.partition(), j.partition());
  const auto mk = part_map(common, k.partition());
  const auto mj = part_map(common, j.partition());
  Eigen::VectorXd mu = common.measures();
  return {expand_blocks(k.coeffs(), mk, mk) - expand_blocks(j.coeffs(), mj, mj),
          mu, mu};
}

}  // namespace densecap
