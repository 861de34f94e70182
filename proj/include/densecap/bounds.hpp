#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Dense>

namespace densecap {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Real50 = boost::multiprecision::cpp_bin_float_50;

/// Parse "4", "-2", "0.125", "1/8", "1e-3" or "2.5e2" into an exact rational.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);

/// Value of a closed-form bound: the exact integer when it is an integer of
/// manageable size, and its base-2 logarithm (exact when rational, always
/// available as a 50-digit approximation).
struct BoundValue {
  std::string formula_id;
  std::optional<BigInt> exact;
  std::optional<Rational> log2_exact;
  Real50 log2 = 0;

  /// Bit length of the exact value (0 when absent).
  std::size_t exact_bits() const;
  /// Decimal digits of the exact value when it has at most `max_bits` bits;
  /// "2^k" for larger powers of two; empty when no exact value exists.
  std::string exact_text(std::size_t max_bits = 4096) const;
  /// log2 as an exact rational when known, otherwise 30 significant digits.
  std::string log2_text() const;
};

/// Largest exponent (in bits) for which exact integers are materialized.
constexpr std::uint64_t kMaxExactBits = std::uint64_t{1} << 24;

/// 2^L B^L.
BoundValue lipschitz_constant(const Rational& B, int L);

/// d = 8 M L ⌈2^{2⌈16/ε²⌉} / ε⌉, M = lcm(d0, dL).
BoundValue wrl_hidden_dim(const Rational& epsilon, int L, std::int64_t d0, std::int64_t dL);

/// Hidden dimension guaranteeing ||Θ - Θ'||_∞ < ε: the weak-regularity
/// dimension at ε' = ε / ((L+2) dL (2B)^L).
BoundValue compression_hidden_dim(const Rational& epsilon, const Rational& B, int L,
                                  std::int64_t d0, std::int64_t dL);

/// c^{-1/2} (6ε)^{-d0/2}; requires ε in (0, 1/3), c > 0.
BoundValue vc_lower_bound(const Rational& epsilon, std::int64_t d0, const Rational& c);

/// ⌈17 log2(c^{1/2} L³ (L+2)² dL⁴ (2B)^{2L}) + 17·2^14 (L+2)² dL² (2B)^{2L} + 306⌉.
BoundValue d0_threshold(const Rational& B, int L, int dL, const Rational& c);

/// Comparison of the compressed parameter count W̃ (at ε0/2, ε0 = 1/8) with
/// the parameter lower bound c^{-1/2}(6ε0)^{-d0/2}.
struct NonUniversalityReport {
  Real50 log2_w_tilde = 0;     ///< log2 of W̃
  Real50 log2_lower_bound = 0; ///< log2 of c^{-1/2}(4/3)^{d0/2}
  Real50 margin = 0;           ///< log2_lower_bound - log2_w_tilde
  bool gap_holds = false;      ///< margin >= 0
  BoundValue hidden_dim;       ///< compression_hidden_dim(ε0/2, B, L, d0, dL)
};
NonUniversalityReport non_universality_check(const Rational& B, int L, int dL,
                                             std::int64_t d0, const Rational& c);

/// f(x) = Σ_m y_m φ(N(x - x_m)), φ(z) = 1 - 2||z||₂ for ||z||₂ < 1/2, else 0,
/// with grid centers x_m = ((k_1 + 1/2)/N, ..., (k_d0 + 1/2)/N). The grid
/// index is m = k_1 + N k_2 + N² k_3 + ... (first coordinate fastest).
class SpikeFunction {
 public:
  SpikeFunction(int d0, int N, std::vector<double> labels);

  double operator()(const Eigen::VectorXd& x) const;
  Eigen::VectorXd center(std::size_t m) const;
  std::size_t grid_size() const { return labels_.size(); }
  int input_dim() const { return d0_; }
  int resolution() const { return n_; }
  const std::vector<double>& labels() const { return labels_; }
  /// 2 N max|y_m|, the Lipschitz constant of f.
  double lipschitz_bound() const;

 private:
  int d0_;
  int n_;
  std::vector<double> labels_;
};

SpikeFunction spike_target(int d0, int N, std::vector<double> labels);

}  // namespace densecap
