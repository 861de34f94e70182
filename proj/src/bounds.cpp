#include "densecap/bounds.hpp"

#include <cctype>
#include <cmath>
#include <numeric>

#include "densecap/error.hpp"

namespace densecap {

namespace mp = boost::multiprecision;

Rational parse_rational(const std::string& text) {
  auto bad = [&] {
    return Error(ErrorKind::parse, "cannot parse '" + text + "' as an exact number");
  };
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const Rational num = parse_rational(text.substr(0, slash));
    const Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) throw bad();
    return num / den;
  }
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  BigInt digits = 0;
  long long scale = 0;  // value = digits * 10^scale
  bool any = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    digits = digits * 10 + (text[i++] - '0');
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits = digits * 10 + (text[i++] - '0');
      --scale;
      any = true;
    }
  }
  if (!any) throw bad();
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
    long long e = 0;
    bool edigits = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      e = e * 10 + (text[i++] - '0');
      edigits = true;
      if (e > 100000) throw bad();
    }
    if (!edigits) throw bad();
    scale += eneg ? -e : e;
  }
  if (i != text.size()) throw bad();
  Rational value = digits;
  const BigInt ten_pow = mp::pow(BigInt(10), static_cast<unsigned>(std::llabs(scale)));
  if (scale >= 0)
    value *= ten_pow;
  else
    value /= ten_pow;
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& r) {
  if (mp::denominator(r) == 1) return mp::numerator(r).str();
  return mp::numerator(r).str() + "/" + mp::denominator(r).str();
}

namespace {

const Real50& ln2() {
  static const Real50 value = mp::log(Real50(2));
  return value;
}

Real50 to_real(const Rational& r) {
  return Real50(mp::numerator(r)) / Real50(mp::denominator(r));
}

Real50 log2_big(const BigInt& x) {
  if (x <= 0) throw Error(ErrorKind::parameter, "log2 of a non-positive number");
  const std::size_t top = mp::msb(x);
  if (top < 160) return mp::log(Real50(x)) / ln2();
  const std::size_t shift = top - 160;
  const BigInt head = x >> shift;
  return mp::log(Real50(head)) / ln2() + Real50(shift);
}

Real50 log2_rat(const Rational& r) {
  if (r <= 0) throw Error(ErrorKind::parameter, "log2 of a non-positive number");
  return log2_big(mp::numerator(r)) - log2_big(mp::denominator(r));
}

bool power_of_two(const BigInt& x, long long& k) {
  if (x <= 0) return false;
  if ((x & (x - 1)) != 0) return false;
  k = static_cast<long long>(mp::msb(x));
  return true;
}

/// log2(r) when r is an integral power of two (possibly negative exponent).
std::optional<Rational> exact_log2(const Rational& r) {
  long long a = 0, b = 0;
  if (r > 0 && power_of_two(mp::numerator(r), a) && power_of_two(mp::denominator(r), b))
    return Rational(a - b);
  return std::nullopt;
}

BigInt ceil_rat(const Rational& r) {
  const BigInt& num = mp::numerator(r);
  const BigInt& den = mp::denominator(r);
  BigInt q = num / den;  // truncates toward zero
  if (q * den < num) q += 1;
  return q;
}

BigInt floor_rat(const Rational& r) {
  const BigInt& num = mp::numerator(r);
  const BigInt& den = mp::denominator(r);
  BigInt q = num / den;
  if (q * den > num) q -= 1;
  return q;
}

Rational rpow(const Rational& base, long long exponent) {
  Rational out = 1;
  for (long long i = 0; i < exponent; ++i) out *= base;
  return out;
}

void finish(BoundValue& v) {
  if (v.exact) {
    v.log2 = log2_big(*v.exact);
    long long k = 0;
    if (power_of_two(*v.exact, k)) v.log2_exact = Rational(k);
  }
}

/// 8 M L ⌈2^{2⌈16/ε²⌉} / ε⌉.
BoundValue hidden_dim_formula(const std::string& id, const Rational& eps, int L, std::int64_t M) {
  BoundValue v;
  v.formula_id = id;
  const BigInt e = ceil_rat(Rational(16) / (eps * eps));
  const BigInt k = 2 * e;
  const BigInt prefactor = BigInt(8) * M * L;
  if (k <= kMaxExactBits) {
    const BigInt two_k = BigInt(1) << static_cast<unsigned>(k);
    v.exact = prefactor * ceil_rat(Rational(two_k) / eps);
    finish(v);
    return v;
  }
  // log2 d = log2(8ML) + k - log2 ε (+ a ceiling correction below 2^-k)
  v.log2 = log2_big(prefactor) + Real50(k) - log2_rat(eps);
  long long p = 0;
  const auto le = exact_log2(eps);
  if (power_of_two(prefactor, p) && le && *le <= Rational(k))
    v.log2_exact = Rational(p) + Rational(k) - *le;
  return v;
}

void require_positive(const Rational& r, const std::string& name) {
  if (r <= 0) throw Error(ErrorKind::parameter, name + " must be positive");
}

}  // namespace

std::size_t BoundValue::exact_bits() const {
  if (!exact || *exact <= 0) return 0;
  return mp::msb(*exact) + 1;
}

std::string BoundValue::exact_text(std::size_t max_bits) const {
  if (!exact) return "";
  if (exact_bits() <= max_bits) return exact->str();
  long long k = 0;
  if (power_of_two(*exact, k)) return "2^" + std::to_string(k);
  return "(" + std::to_string(exact_bits()) + "-bit integer)";
}

std::string BoundValue::log2_text() const {
  if (log2_exact) return to_string(*log2_exact);
  return log2.str(30);
}

BoundValue lipschitz_constant(const Rational& B, int L) {
  require_positive(B, "B");
  if (L < 1) throw Error(ErrorKind::parameter, "L must be at least 1");
  BoundValue v;
  v.formula_id = "lipschitz";
  const Rational value = rpow(2 * B, L);
  if (mp::denominator(value) == 1 && mp::msb(mp::numerator(value)) < kMaxExactBits)
    v.exact = mp::numerator(value);
  v.log2 = Real50(L) * log2_rat(2 * B);
  if (auto k = exact_log2(2 * B)) v.log2_exact = *k * L;
  return v;
}

BoundValue wrl_hidden_dim(const Rational& epsilon, int L, std::int64_t d0, std::int64_t dL) {
  require_positive(epsilon, "epsilon");
  if (L < 1 || d0 < 1 || dL < 1) throw Error(ErrorKind::parameter, "L, d0, dL must be >= 1");
  return hidden_dim_formula("wrl-hidden-dim", epsilon, L, std::lcm(d0, dL));
}

BoundValue compression_hidden_dim(const Rational& epsilon, const Rational& B, int L,
                                  std::int64_t d0, std::int64_t dL) {
  require_positive(epsilon, "epsilon");
  if (L < 1 || d0 < 1 || dL < 1) throw Error(ErrorKind::parameter, "L, d0, dL must be >= 1");
  if (B < L + 2) throw Error(ErrorKind::invalid_bound, "compression bound needs B >= L+2");
  const Rational scale = Rational(static_cast<std::int64_t>(L + 2) * dL) * rpow(2 * B, L);
  return hidden_dim_formula("compression-hidden-dim", epsilon / scale, L, std::lcm(d0, dL));
}

BoundValue vc_lower_bound(const Rational& epsilon, std::int64_t d0, const Rational& c) {
  if (!(epsilon > 0 && epsilon < Rational(1, 3)))
    throw Error(ErrorKind::parameter, "epsilon must lie in (0, 1/3)");
  require_positive(c, "c");
  if (d0 < 1) throw Error(ErrorKind::parameter, "d0 must be >= 1");
  BoundValue v;
  v.formula_id = "vc-lower-bound";
  const Rational x = 6 * epsilon;
  v.log2 = -log2_rat(c) / 2 - Real50(d0) * log2_rat(x) / 2;
  const auto lc = exact_log2(c);
  const auto lx = exact_log2(x);
  if (lc && lx) v.log2_exact = -*lc / 2 - Rational(d0) * *lx / 2;
  if (d0 <= 4096) {
    const Rational y = 1 / (c * rpow(x, d0));
    if (mp::denominator(y) == 1) {
      const BigInt root = mp::sqrt(mp::numerator(y));
      if (root * root == mp::numerator(y)) v.exact = root;
    }
  }
  return v;
}

BoundValue d0_threshold(const Rational& B, int L, int dL, const Rational& c) {
  require_positive(c, "c");
  if (L < 1 || dL < 1) throw Error(ErrorKind::parameter, "L, dL must be >= 1");
  if (B < L + 2) throw Error(ErrorKind::invalid_bound, "threshold needs B >= L+2");
  const Rational two_b_2l = rpow(2 * B, 2 * L);
  const Rational y = Rational(L * L * L) * (L + 2) * (L + 2) * rpow(Rational(dL), 4) * two_b_2l;
  const Rational main = Rational(17) * 16384 * (L + 2) * (L + 2) * dL * dL * two_b_2l + 306;
  // log term 17 log2(c^{1/2} Y) = (17/2) log2(c Y²)
  const Rational inner = c * y * y;
  BoundValue v;
  v.formula_id = "d0-threshold";
  if (auto k = exact_log2(inner)) {
    v.exact = ceil_rat(main + Rational(17) * *k / 2);
  } else {
    const BigInt whole = floor_rat(main);
    const Real50 rest = to_real(main - whole) + Real50(17) * log2_rat(inner) / 2;
    v.exact = whole + BigInt(mp::ceil(rest));
  }
  finish(v);
  return v;
}

NonUniversalityReport non_universality_check(const Rational& B, int L, int dL, std::int64_t d0,
                                             const Rational& c) {
  require_positive(c, "c");
  if (d0 < 1) throw Error(ErrorKind::parameter, "d0 must be >= 1");
  if (B < L + 2) throw Error(ErrorKind::invalid_bound, "check needs B >= L+2");
  NonUniversalityReport r;
  const Rational two_b_2l = rpow(2 * B, 2 * L);
  const Rational poly = Rational(d0) * d0 * rpow(Rational(dL), 4) * (L * L * L) * (L + 2) *
                        (L + 2) * two_b_2l;
  const Rational exponent = Rational(16384) * (L + 2) * (L + 2) * dL * dL * two_b_2l + 18;
  r.log2_w_tilde = log2_rat(poly) + to_real(exponent);
  r.log2_lower_bound = -log2_rat(c) / 2 + Real50(d0) * log2_rat(Rational(4, 3)) / 2;
  r.margin = r.log2_lower_bound - r.log2_w_tilde;
  r.gap_holds = r.margin >= 0;
  r.hidden_dim = compression_hidden_dim(Rational(1, 16), B, L, d0, dL);
  return r;
}

SpikeFunction::SpikeFunction(int d0, int N, std::vector<double> labels)
    : d0_(d0), n_(N), labels_(std::move(labels)) {
  if (d0 < 1 || N < 1) throw Error(ErrorKind::parameter, "spike function needs d0, N >= 1");
  std::size_t expected = 1;
  for (int i = 0; i < d0; ++i) {
    if (expected > (std::size_t{1} << 40) / static_cast<std::size_t>(N))
      throw Error(ErrorKind::capacity, "spike grid N^d0 too large");
    expected *= static_cast<std::size_t>(N);
  }
  if (labels_.size() != expected)
    throw Error(ErrorKind::dimension, "spike function needs N^d0 = " + std::to_string(expected) +
                                          " labels, got " + std::to_string(labels_.size()));
}

Eigen::VectorXd SpikeFunction::center(std::size_t m) const {
  Eigen::VectorXd x(d0_);
  for (int i = 0; i < d0_; ++i) {
    x(i) = (static_cast<double>(m % static_cast<std::size_t>(n_)) + 0.5) / n_;
    m /= static_cast<std::size_t>(n_);
  }
  return x;
}

double SpikeFunction::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != d0_) throw Error(ErrorKind::dimension, "spike input has wrong length");
  // the support balls of radius 1/(2N) sit inside their grid cells, so only
  // the cell containing x can contribute
  std::size_t m = 0;
  std::size_t stride = 1;
  double r2 = 0.0;
  for (int i = 0; i < d0_; ++i) {
    long long k = static_cast<long long>(std::floor(x(i) * n_));
    k = std::clamp<long long>(k, 0, n_ - 1);
    const double z = n_ * x(i) - (static_cast<double>(k) + 0.5);
    r2 += z * z;
    m += static_cast<std::size_t>(k) * stride;
    stride *= static_cast<std::size_t>(n_);
  }
  const double r = std::sqrt(r2);
  return r < 0.5 ? labels_[m] * (1.0 - 2.0 * r) : 0.0;
}

double SpikeFunction::lipschitz_bound() const {
  double m = 0.0;
  for (double y : labels_) m = std::max(m, std::abs(y));
  return 2.0 * n_ * m;
}

SpikeFunction spike_target(int d0, int N, std::vector<double> labels) {
  return SpikeFunction(d0, N, std::move(labels));
}

}  // namespace densecap
