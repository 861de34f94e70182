#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace densecap {

/// Fixed-width dense ReLU network with the (L+2)-normalized forward pass.
///
/// Layer l (1-based, l = 1..L) maps dimension d_{l-1} to d_l where
/// d_0 = input_dim, d_L = output_dim and every other width equals hidden_dim.
/// weights[l-1] is d_l x d_{l-1}; biases[l-1] has length d_l.
struct DenseNetwork {
  int depth = 0;       ///< L
  int input_dim = 0;   ///< d0
  int output_dim = 0;  ///< dL
  int hidden_dim = 0;  ///< d
  double bound = 0.0;  ///< B
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  /// Width of layer l for l = 0..L.
  int width(int layer) const;
  /// Kernel size n = (L+2) d.
  int size() const { return (depth + 2) * hidden_dim; }
  /// Largest |parameter|.
  double max_abs_parameter() const;
};

/// Construct and validate a network (shape, divisibility, L >= 2, every
/// parameter in [-B, B]). Throws Error on the first violation, naming it.
DenseNetwork make_network(int L, int d0, int dL, int d, double B,
                          std::vector<Eigen::MatrixXd> weights,
                          std::vector<Eigen::VectorXd> biases);

/// Validate an existing network; throws Error naming the offending entry.
void validate_network(const DenseNetwork& net);

/// Network of the given shape with every parameter equal to zero.
DenseNetwork zero_network(int L, int d0, int dL, int d, double B);

/// Network whose parameters are drawn uniformly from [-B, B].
DenseNetwork random_network(int L, int d0, int dL, int d, double B,
                            std::mt19937_64& rng);

/// Normalized forward pass:
///   h_i = ReLU( sum_j (W_ij h_j + b_i) / (d_{l-1} (L+2)) )
/// for hidden layers; the output layer omits the ReLU. The bias sits inside
/// the sum over j, so its effective contribution is b_i / (L+2).
Eigen::VectorXd forward(const DenseNetwork& net, const Eigen::VectorXd& x);

/// Same as forward but returns every layer's activation h^(0)..h^(L).
std::vector<Eigen::VectorXd> forward_trace(const DenseNetwork& net,
                                           const Eigen::VectorXd& x);

/// Project every parameter onto [-B, B]; the result carries bound B.
DenseNetwork clamp_dense(const DenseNetwork& net, double B);

/// (L-1) d^2 + (d0 + dL + L - 1) d + dL, the count used by the size bounds.
/// It exceeds the number of stored entries by exactly d^2 (see
/// count_parameters).
std::uint64_t param_count(std::uint64_t L, std::uint64_t d0, std::uint64_t dL,
                          std::uint64_t d);

/// Number of weight and bias entries actually stored in `net`:
/// (L-2) d^2 + (d0 + dL + L - 1) d + dL.
std::uint64_t count_parameters(const DenseNetwork& net);

/// Text codec. Format:
///   densecap-net v1
///   L d0 dL d B
///   W 1            (followed by d_1 rows of d_0 reals)
///   b 1            (followed by one row of d_1 reals)
///   ... repeated for every layer
std::string serialize(const DenseNetwork& net);
DenseNetwork deserialize(const std::string& text);

DenseNetwork load_network(const std::string& path);
void save_network(const DenseNetwork& net, const std::string& path);

}  // namespace densecap
