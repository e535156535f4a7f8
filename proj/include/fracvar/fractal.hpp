#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "fracvar/base_function.hpp"
#include "fracvar/common.hpp"

namespace fracvar {

// f(t) = sum_{m>=0} alpha^m phi(b^m t) on [0,1], extended by f(min(t,1)).
class FractalSpec {
 public:
  FractalSpec(BaseFunction phi, int b, double alpha) : phi_(std::move(phi)), b_(b), alpha_(alpha) {
    if (b_ < 2) throw std::invalid_argument("FractalSpec: b must be >= 2, got " + std::to_string(b_));
    if (!std::isfinite(alpha_) || alpha_ == 0.0 || std::fabs(alpha_) >= 1.0)
      throw std::invalid_argument("FractalSpec: alpha must lie in (-1,1) \\ {0}");
    if (const auto* s = std::get_if<BaseFunction::SkewedTent>(&phi_.kind()); s && s->b != b_)
      throw std::invalid_argument("FractalSpec: skewed tent built for b=" + std::to_string(s->b) +
                                  " used with b=" + std::to_string(b_));
  }

  // alpha = sign * b^(-H). The Hurst parameter is kept exactly, so q = 1/H
  // carries no logarithm round-off.
  static FractalSpec from_hurst(BaseFunction phi, int b, double hurst, int sign = 1) {
    if (!(hurst > 0.0) || !std::isfinite(hurst))
      throw std::invalid_argument("FractalSpec::from_hurst: H must be > 0");
    if (sign != 1 && sign != -1) throw std::invalid_argument("FractalSpec::from_hurst: sign must be +1 or -1");
    FractalSpec s(std::move(phi), b, sign * std::pow(static_cast<double>(b), -hurst));
    s.exact_hurst_ = hurst;
    return s;
  }

  const BaseFunction& phi() const { return phi_; }
  int b() const { return b_; }
  double alpha() const { return alpha_; }

  // 1/(alpha b), the ratio of the partial-sum process.
  double gamma() const { return 1.0 / (alpha_ * b_); }

  double hurst() const {
    if (exact_hurst_) return *exact_hurst_;
    return -std::log(std::fabs(alpha_)) / std::log(static_cast<double>(b_));
  }

  bool is_rough() const { return std::fabs(alpha_) * b_ > 1.0 + 1e-12; }
  bool is_critical() const { return std::fabs(std::fabs(alpha_) * b_ - 1.0) <= 1e-12; }

  double q_exponent() const {
    if (!is_rough())
      throw regime_error("q_exponent: requires 1/b < |alpha| < 1 (|alpha|*b = " +
                         std::to_string(std::fabs(alpha_) * b_) + ")");
    if (exact_hurst_) return 1.0 / *exact_hurst_;
    return -std::log(static_cast<double>(b_)) / std::log(std::fabs(alpha_));
  }

 private:
  BaseFunction phi_;
  int b_;
  double alpha_;
  std::optional<double> exact_hurst_;
};

inline double q_exponent(const FractalSpec& spec) { return spec.q_exponent(); }
inline double hurst(const FractalSpec& spec) { return spec.hurst(); }

// Exact n-term truncation at the grid point k b^-n; all later terms vanish there.
inline double eval_f_badic(const FractalSpec& spec, std::uint64_t k, int n) {
  if (n < 0) throw std::invalid_argument("eval_f_badic: n must be >= 0");
  const std::uint64_t bn = checked_ipow(static_cast<std::uint64_t>(spec.b()), n);
  if (bn == 0) throw std::out_of_range("eval_f_badic: b^n exceeds 63 bits at n=" + std::to_string(n));
  if (k > bn) throw std::out_of_range("eval_f_badic: k=" + std::to_string(k) + " outside [0, b^n]");
  const auto b = static_cast<std::uint64_t>(spec.b());
  const BaseFunction& phi = spec.phi();
  compensated_sum acc;
  double weight = 1.0;
  std::uint64_t denom = bn;
  for (int m = 0; m < n; ++m) {
    const std::uint64_t num = k % denom;
    acc.add(weight * phi(static_cast<double>(num) / static_cast<double>(denom)));
    weight *= spec.alpha();
    denom /= b;
  }
  return acc.value();
}

namespace detail {

// Number of series terms whose tail sup|phi| |alpha|^N / (1-|alpha|) is <= tol.
inline int truncation_terms(const FractalSpec& spec, double tol) {
  const double a = std::fabs(spec.alpha());
  const double sup = spec.phi().sup_norm();
  if (sup == 0.0) return 1;
  const double ratio = tol * (1.0 - a) / sup;
  if (ratio >= 1.0) return 1;
  int n = static_cast<int>(std::ceil(std::log(ratio) / std::log(a)));
  n = std::max(n, 1);
  while (sup * std::pow(a, n) / (1.0 - a) > tol) ++n;
  return n;
}

// If t is the double nearest to k / b^n for some small n, returns (k, n).
inline std::optional<std::pair<std::uint64_t, int>> badic_preimage(double t, int b) {
  std::uint64_t bn = 1;
  for (int n = 0; bn <= (std::uint64_t{1} << 32); ++n) {
    const double scaled = t * static_cast<double>(bn);
    const double k = std::nearbyint(scaled);
    if (k >= 0.0 && k <= static_cast<double>(bn) && k / static_cast<double>(bn) == t)
      return std::make_pair(static_cast<std::uint64_t>(k), n);
    bn *= static_cast<std::uint64_t>(b);
  }
  return std::nullopt;
}

}  // namespace detail

// Truncated series with compensated summation. Points on a b-adic grid
// (up to b^n <= 2^32) are evaluated exactly through eval_f_badic; otherwise the
// fractional parts of b^m t are tracked exactly on the binary expansion of t.
inline double eval_f(const FractalSpec& spec, double t, double tol = 1e-12) {
  if (!(tol > 0.0)) throw std::invalid_argument("eval_f: tol must be > 0");
  if (!(t >= 0.0)) throw std::invalid_argument("eval_f: t must be >= 0");
  t = std::min(t, 1.0);
  if (t == 0.0 || t == 1.0) return 0.0;

  if (auto pre = detail::badic_preimage(t, spec.b())) return eval_f_badic(spec, pre->first, pre->second);

  const int terms = detail::truncation_terms(spec, tol);
  const BaseFunction& phi = spec.phi();
  const auto b = static_cast<unsigned>(spec.b());

  int exp2 = 0;
  const double mant = std::frexp(t, &exp2);
  auto mantissa = static_cast<std::uint64_t>(std::ldexp(mant, 53));
  int e = 53 - exp2;
  while ((mantissa & 1u) == 0 && e > 0) {
    mantissa >>= 1;
    --e;
  }

  compensated_sum acc;
  double weight = 1.0;
  if (e <= 120) {
    using u128 = unsigned __int128;
    const u128 mask = (u128{1} << e) - 1;
    u128 r = mantissa;
    for (int m = 0; m < terms; ++m) {
      acc.add(weight * phi(std::ldexp(static_cast<double>(r), -e)));
      weight *= spec.alpha();
      r = (r * b) & mask;
    }
  } else {
    long double x = t;
    for (int m = 0; m < terms; ++m) {
      acc.add(weight * phi(static_cast<double>(x)));
      weight *= spec.alpha();
      x = x * b;
      x -= std::floor(x);
    }
  }
  return acc.value();
}

}  // namespace fracvar
