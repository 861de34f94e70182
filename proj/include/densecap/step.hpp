#pragma once

#include <Eigen/Dense>

#include "densecap/partition.hpp"

namespace densecap {

/// Step kernel: coefficient c_ij on P_i x P_j, |c_ij| <= 1.
class StepKernel {
 public:
  StepKernel(Partition partition, Eigen::MatrixXd coeffs);

  /// Constant kernel on the trivial partition.
  static StepKernel constant(double c);

  const Partition& partition() const { return partition_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  std::size_t size() const { return partition_.size(); }

  /// The same kernel expressed on a refinement of its partition.
  StepKernel on(const Partition& finer) const;

 private:
  Partition partition_;
  Eigen::MatrixXd coeffs_;
};

/// Step signal: value f_i on part P_i.
class StepSignal {
 public:
  StepSignal(Partition partition, Eigen::VectorXd values);

  const Partition& partition() const { return partition_; }
  const Eigen::VectorXd& values() const { return values_; }
  std::size_t size() const { return partition_.size(); }

  /// The same signal expressed on a refinement of its partition.
  StepSignal on(const Partition& finer) const;

 private:
  Partition partition_;
  Eigen::VectorXd values_;
};

/// A bounded-size matrix of block values with row and column measures.
/// This is the common currency of the cut-norm routines; it also represents
/// differences of step kernels, whose entries may leave [-1, 1].
struct MeasuredMatrix {
  Eigen::MatrixXd values;
  Eigen::VectorXd row_measure;
  Eigen::VectorXd col_measure;

  static MeasuredMatrix of(const StepKernel& k);
  /// K - J on the common refinement of their partitions.
  static MeasuredMatrix difference(const StepKernel& k, const StepKernel& j);
};

/// Expand block values from a coarse partition onto a refinement.
Eigen::MatrixXd expand_blocks(const Eigen::MatrixXd& coarse,
                              const std::vector<int>& row_map,
                              const std::vector<int>& col_map);

}  // namespace densecap
