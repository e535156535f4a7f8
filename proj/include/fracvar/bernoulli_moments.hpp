#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fracvar/common.hpp"
#include "fracvar/increment_model.hpp"

namespace fracvar {

// E[Z^k], k = 0..K, for Z = sum_{m>=1} gamma^m Y_m with Y_m i.i.d. two-point.
struct MomentTable {
  double mu = -1.0;
  double nu = 1.0;
  double p = 0.5;
  double gamma = 0.5;
  std::vector<double> moments;
};

namespace detail {

inline void check_two_point(double mu, double nu, double p, const char* op) {
  if (!std::isfinite(mu) || !std::isfinite(nu)) throw std::invalid_argument(std::string(op) + ": mu, nu must be finite");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument(std::string(op) + ": p must lie in (0,1)");
}

// Row k of Pascal's triangle into `row` (row has size k+1 on return).
template <typename T>
void pascal_next(std::vector<T>& row) {
  row.push_back(T(1));
  for (std::size_t j = row.size() - 2; j >= 1; --j) row[j] = row[j] + row[j - 1];
}

}  // namespace detail

// E[Z^k] = gamma^k / (1 - gamma^k) * sum_{j<k} C(k,j) (p nu^{k-j} + (1-p) mu^{k-j}) E[Z^j]
inline MomentTable moments_recursive(double mu, double nu, double p, double gamma, int K = 16) {
  detail::check_two_point(mu, nu, p, "moments_recursive");
  if (!(std::fabs(gamma) < 1.0) || gamma == 0.0)
    throw std::invalid_argument("moments_recursive: gamma must lie in (-1,1) \\ {0}");
  if (K < 0) throw std::invalid_argument("moments_recursive: K must be >= 0");

  // c[i] = E[Y^i] = p nu^i + (1-p) mu^i
  std::vector<double> c(K + 1);
  for (int i = 0; i <= K; ++i) c[i] = p * int_pow(nu, i) + (1.0 - p) * int_pow(mu, i);

  MomentTable t{mu, nu, p, gamma, std::vector<double>(K + 1, 0.0)};
  t.moments[0] = 1.0;
  std::vector<double> binom{1.0};
  for (int k = 1; k <= K; ++k) {
    detail::pascal_next(binom);
    compensated_sum acc;
    for (int j = 0; j < k; ++j) acc.add(binom[j] * c[k - j] * t.moments[j]);
    const double gk = int_pow(gamma, k);
    t.moments[k] = gk / (1.0 - gk) * acc.value();
  }
  return t;
}

// Same recursion over an exact field (e.g. boost::multiprecision::cpp_rational).
template <typename T>
std::vector<T> moments_recursive_exact(const T& mu, const T& nu, const T& p, const T& gamma, int K) {
  if (K < 0) throw std::invalid_argument("moments_recursive_exact: K must be >= 0");
  if (gamma == T(0) || gamma >= T(1) || gamma <= T(-1))
    throw std::invalid_argument("moments_recursive_exact: gamma must lie in (-1,1) \\ {0}");
  if (p <= T(0) || p >= T(1)) throw std::invalid_argument("moments_recursive_exact: p must lie in (0,1)");

  std::vector<T> c(K + 1);
  T nu_i(1), mu_i(1);
  for (int i = 0; i <= K; ++i) {
    c[i] = p * nu_i + (T(1) - p) * mu_i;
    nu_i *= nu;
    mu_i *= mu;
  }
  std::vector<T> m(K + 1, T(0));
  m[0] = T(1);
  std::vector<T> binom{T(1)};
  T gk(1);
  for (int k = 1; k <= K; ++k) {
    detail::pascal_next(binom);
    T acc(0);
    for (int j = 0; j < k; ++j) acc += binom[j] * c[k - j] * m[j];
    gk *= gamma;
    m[k] = gk / (T(1) - gk) * acc;
  }
  return m;
}

// Sign of E[Z^k] for odd k >= 3, read off from sign(nu + mu).
inline int odd_moment_sign(double mu, double nu, double p, double gamma, int k) {
  detail::check_two_point(mu, nu, p, "odd_moment_sign");
  if (!(mu < 0.0 && nu > 0.0)) throw std::invalid_argument("odd_moment_sign: need mu < 0 < nu");
  if (std::fabs(p * nu + (1.0 - p) * mu) > 1e-12)
    throw std::invalid_argument("odd_moment_sign: law is not centered (p nu + (1-p) mu != 0)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("odd_moment_sign: gamma must lie in (0,1)");
  if (k < 3 || k % 2 == 0) throw std::invalid_argument("odd_moment_sign: k must be odd and >= 3");
  const double s = nu + mu;
  if (std::fabs(s) <= 1e-12 * std::max(1.0, nu)) return 0;
  return s > 0.0 ? 1 : -1;
}

struct TruncatedMoment {
  double value = 0.0;
  double error_bound = 0.0;
  int depth = 0;
};

using ExactLaw = std::variant<IIDTwoPointLaw, MarkovTernaryLaw>;

namespace detail {

inline IncrementLaw widen(const ExactLaw& law) {
  return std::visit([](const auto& l) -> IncrementLaw { return l; }, law);
}

inline void check_truncation(double gamma, int N, const char* op) {
  if (!(std::fabs(gamma) < 1.0) || gamma == 0.0)
    throw std::invalid_argument(std::string(op) + ": gamma must lie in (-1,1) \\ {0}");
  if (N < 0) throw std::invalid_argument(std::string(op) + ": depth must be >= 0");
}

// sup |Z - S_N| and sup max(|Z|, |S_N|).
inline std::pair<double, double> tail_and_radius(double c_y, double gamma, int N) {
  const double g = std::fabs(gamma);
  return {c_y * std::pow(g, N + 1) / (1.0 - g), c_y * g / (1.0 - g)};
}

}  // namespace detail

// E|S_N|^q by exact enumeration of any increment law, with a rigorous bound
// on |E|Z|^q - E|S_N|^q| from |Z - S_N| <= C_Y |gamma|^{N+1} / (1 - |gamma|).
inline TruncatedMoment abs_moment_enumerated(const IncrementLaw& law, double gamma, double q, int N,
                                             std::uint64_t budget = default_streaming_budget) {
  detail::check_truncation(gamma, N, "abs_moment_truncated");
  if (!(q >= 1.0)) throw std::invalid_argument("abs_moment_truncated: q must be >= 1");
  const double value = stream_expectation(law, gamma, N, [q](double s) { return abs_pow(s, q); }, budget);
  const auto [tail, radius] = detail::tail_and_radius(law_bound(law), gamma, N);
  return {value, q * std::pow(radius, q - 1.0) * tail, N};
}

inline TruncatedMoment abs_moment_truncated(const ExactLaw& law, double gamma, double q, int N,
                                            std::uint64_t budget = default_streaming_budget) {
  return abs_moment_enumerated(detail::widen(law), gamma, q, N, budget);
}

// E[S_N^k] for integer k >= 1, same error bound (|x^k - y^k| <= k M^{k-1} |x - y|).
inline TruncatedMoment signed_moment_enumerated(const IncrementLaw& law, double gamma, int k, int N,
                                                std::uint64_t budget = default_streaming_budget) {
  detail::check_truncation(gamma, N, "signed_moment_truncated");
  if (k < 1) throw std::invalid_argument("signed_moment_truncated: k must be >= 1");
  const double value = stream_expectation(law, gamma, N, [k](double s) { return int_pow(s, k); }, budget);
  const auto [tail, radius] = detail::tail_and_radius(law_bound(law), gamma, N);
  return {value, k * std::pow(radius, k - 1) * tail, N};
}

inline TruncatedMoment signed_moment_truncated(const ExactLaw& law, double gamma, int k, int N,
                                               std::uint64_t budget = default_streaming_budget) {
  return signed_moment_enumerated(detail::widen(law), gamma, k, N, budget);
}

// Smallest depth whose truncation bound for E|Z|^q is <= target, capped at the
// deepest enumeration that fits the budget.
inline int enumeration_depth(const IncrementLaw& law, double gamma, double q, double target,
                             std::uint64_t budget) {
  const double g = std::fabs(gamma);
  if (!(g < 1.0)) throw regime_error("enumeration_depth: requires |gamma| < 1");
  int n = 1;
  for (;; ++n) {
    if (path_count(law, n + 1) > budget) break;
    const auto [tail, radius] = detail::tail_and_radius(law_bound(law), gamma, n);
    if (std::max(q, 1.0) * std::pow(radius, std::max(q, 1.0) - 1.0) * tail <= target) break;
  }
  if (path_count(law, n) > budget)
    throw budget_exceeded("enumeration_depth: even depth 1 exceeds the budget of " + std::to_string(budget));
  return n;
}

// b^3 (b - 2l) / (8 (b^2 - 1) l^2 (b - l)^2): E[Z^3] for the skewed-tent law at gamma = b^{-2/3}.
inline double third_moment_closed_form(int b, int ell) {
  const double bb = b, l = ell;
  return bb * bb * bb * (bb - 2 * l) / (8.0 * (bb * bb - 1.0) * l * l * (bb - l) * (bb - l));
}

}  // namespace fracvar
