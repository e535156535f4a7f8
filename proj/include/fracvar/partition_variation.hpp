#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fracvar/common.hpp"
#include "fracvar/fractal.hpp"
#include "fracvar/parallel.hpp"

namespace fracvar {

using Evaluator = std::function<double(double)>;

struct VariationSeries {
  double p = 1.0;
  double t = 1.0;
  int b = 2;
  bool signed_sum = false;
  std::vector<std::pair<int, double>> values;
};

inline constexpr std::uint64_t default_partition_budget = 30'000'000;

namespace detail {

inline constexpr std::uint64_t partition_chunk = 1u << 14;

// floor(t b^n), snapping t b^n to an integer when it is within round-off of one
// (t = k b^-n is rarely exact in binary when b is not a power of two).
inline std::uint64_t last_index(double t, std::uint64_t bn) {
  const double x = t * static_cast<double>(bn);
  const double r = std::nearbyint(x);
  if (std::fabs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::floor(x));
}

inline std::uint64_t grid_size(int b, int n, const char* op) {
  if (n < 0) throw std::invalid_argument(std::string(op) + ": n must be >= 0");
  const std::uint64_t bn = checked_ipow(static_cast<std::uint64_t>(b), n);
  if (bn == 0) throw budget_exceeded(std::string(op) + ": b^n exceeds 63 bits at n=" + std::to_string(n));
  return bn;
}

inline void check_t(double t, const char* op) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument(std::string(op) + ": t must lie in [0,1]");
}

// Sum over k = 0..last of term(value(k+1) - value(k)), chunked with a
// compensated sum per chunk and chunks combined in index order.
template <typename ValueAt, typename Term>
double grid_sum(std::uint64_t last, ValueAt&& value_at, Term&& term, unsigned threads) {
  const std::uint64_t count = last + 1;
  const std::size_t chunks = static_cast<std::size_t>((count + partition_chunk - 1) / partition_chunk);
  auto partial = parallel_map<compensated_sum>(chunks, threads, [&](std::size_t c) {
    const std::uint64_t lo = c * partition_chunk;
    const std::uint64_t hi = std::min(count, lo + partition_chunk);
    compensated_sum acc;
    double prev = value_at(lo);
    for (std::uint64_t k = lo; k < hi; ++k) {
      const double next = value_at(k + 1);
      acc.add(term(next - prev));
      prev = next;
    }
    return acc;
  });
  compensated_sum total;
  for (const auto& s : partial) total.add(s);
  return total.value();
}

template <typename Term>
double fractal_grid_sum(const FractalSpec& spec, double t, int n, Term&& term, unsigned threads, const char* op) {
  check_t(t, op);
  const std::uint64_t bn = grid_size(spec.b(), n, op);
  const std::uint64_t last = std::min(last_index(t, bn), bn);
  auto value_at = [&](std::uint64_t k) { return eval_f_badic(spec, std::min(k, bn), n); };
  return grid_sum(last, value_at, term, threads);
}

template <typename Term>
double generic_grid_sum(const Evaluator& g, double t, int n, int b, Term&& term, unsigned threads,
                        const char* op) {
  check_t(t, op);
  if (b < 2) throw std::invalid_argument(std::string(op) + ": b must be >= 2");
  const std::uint64_t bn = grid_size(b, n, op);
  const std::uint64_t last = std::min(last_index(t, bn), bn);
  const double denom = static_cast<double>(bn);
  auto value_at = [&](std::uint64_t k) { return g(std::min(static_cast<double>(k) / denom, 1.0)); };
  return grid_sum(last, value_at, term, threads);
}

inline void check_p(double p, const char* op) {
  if (!(p >= 1.0)) throw std::invalid_argument(std::string(op) + ": p must be >= 1");
}

inline void check_odd(int q, const char* op) {
  if (q < 1 || q % 2 == 0)
    throw std::invalid_argument(std::string(op) + ": q must be an odd positive integer, got " + std::to_string(q));
}

}  // namespace detail

// V_{p,t,n}: sum over k <= floor(t b^n) of |f((k+1)b^-n) - f(k b^-n)|^p, with
// grid values from the exact b-adic evaluation.
inline double partition_sum(const FractalSpec& spec, double p, double t, int n, unsigned threads = 1) {
  detail::check_p(p, "partition_sum");
  return detail::fractal_grid_sum(
      spec, t, n, [p](double d) { return abs_pow(d, p); }, threads, "partition_sum");
}

inline double partition_sum(const Evaluator& g, double p, double t, int n, int b, unsigned threads = 1) {
  detail::check_p(p, "partition_sum");
  return detail::generic_grid_sum(
      g, t, n, b, [p](double d) { return abs_pow(d, p); }, threads, "partition_sum");
}

inline double signed_partition_sum(const FractalSpec& spec, int q, double t, int n, unsigned threads = 1) {
  detail::check_odd(q, "signed_partition_sum");
  return detail::fractal_grid_sum(
      spec, t, n, [q](double d) { return int_pow(d, q); }, threads, "signed_partition_sum");
}

inline double signed_partition_sum(const Evaluator& g, int q, double t, int n, int b, unsigned threads = 1) {
  detail::check_odd(q, "signed_partition_sum");
  return detail::generic_grid_sum(
      g, t, n, b, [q](double d) { return int_pow(d, q); }, threads, "signed_partition_sum");
}

inline VariationSeries variation_series(const FractalSpec& spec, double p, double t, int n_min, int n_max,
                                        bool signed_sum, std::uint64_t budget = default_partition_budget,
                                        unsigned threads = 1) {
  if (n_min > n_max)
    throw std::invalid_argument("variation_series: n_min=" + std::to_string(n_min) + " > n_max=" +
                                std::to_string(n_max));
  if (n_min < 0) throw std::invalid_argument("variation_series: n_min must be >= 0");
  int q = 0;
  if (signed_sum) {
    if (!near_odd_integer(p, 0.0, q) || q < 3)
      throw std::invalid_argument("variation_series: signed series needs an odd integer p >= 3");
  } else {
    detail::check_p(p, "variation_series");
  }
  for (int n = n_min; n <= n_max; ++n) {
    const std::uint64_t bn = checked_ipow(static_cast<std::uint64_t>(spec.b()), n);
    if (bn == 0 || bn > budget)
      throw budget_exceeded("variation_series: b^n exceeds the budget of " + std::to_string(budget) +
                            " increments at n=" + std::to_string(n));
  }

  VariationSeries series{p, t, spec.b(), signed_sum, {}};
  for (int n = n_min; n <= n_max; ++n) {
    const double v = signed_sum ? signed_partition_sum(spec, q, t, n, threads) : partition_sum(spec, p, t, n, threads);
    series.values.emplace_back(n, v);
  }
  return series;
}

}  // namespace fracvar
