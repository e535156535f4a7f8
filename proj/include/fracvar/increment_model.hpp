#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/rational.hpp>

#include "fracvar/base_function.hpp"
#include "fracvar/common.hpp"
#include "fracvar/fractal.hpp"

namespace fracvar {

using Rational = boost::rational<std::int64_t>;

inline constexpr std::uint64_t default_enumeration_budget = 10'000'000;
inline constexpr std::uint64_t default_streaming_budget = std::uint64_t{1} << 27;

// lambda_{m,k} = (phi((k+1) b^-m) - phi(k b^-m)) b^m
inline double lambda_coeff(const BaseFunction& phi, int b, int m, std::uint64_t k) {
  if (b < 2) throw std::invalid_argument("lambda_coeff: b must be >= 2");
  if (m < 1) throw std::invalid_argument("lambda_coeff: m must be >= 1");
  const std::uint64_t bm = checked_ipow(static_cast<std::uint64_t>(b), m);
  if (bm == 0) throw std::out_of_range("lambda_coeff: b^m exceeds 63 bits");
  if (k >= bm) throw std::out_of_range("lambda_coeff: k=" + std::to_string(k) + " outside [0, b^m)");
  const double denom = static_cast<double>(bm);
  return phi.mean_slope(static_cast<double>(k) / denom, 1.0 / denom);
}

struct LambdaTable {
  int b = 2;
  int m = 1;
  std::vector<double> values;
};

inline LambdaTable make_lambda_table(const BaseFunction& phi, int b, int m,
                                     std::uint64_t budget = default_enumeration_budget) {
  const std::uint64_t bm = checked_ipow(static_cast<std::uint64_t>(b), m);
  if (bm == 0 || bm > budget)
    throw budget_exceeded("make_lambda_table: b^m exceeds the budget of " + std::to_string(budget) +
                          " at m=" + std::to_string(m));
  LambdaTable t{b, m, {}};
  t.values.reserve(bm);
  for (std::uint64_t k = 0; k < bm; ++k) t.values.push_back(lambda_coeff(phi, b, m, k));
  return t;
}

// Two-point i.i.d. law of the skewed-tent increments: Y = nu w.p. p, else mu.
struct IIDTwoPointLaw {
  double mu = -1.0;
  double nu = 1.0;
  double p = 0.5;
  int b = 2;
  int ell = 1;
};

inline IIDTwoPointLaw iid_params(int b, int ell) {
  if (b < 2) throw std::invalid_argument("iid_params: b must be >= 2");
  if (ell < 1 || ell > b - 1) throw std::invalid_argument("iid_params: need 1 <= l <= b-1");
  return {-static_cast<double>(b) / (2.0 * (b - ell)), static_cast<double>(b) / (2.0 * ell),
          static_cast<double>(ell) / b, b, ell};
}

// Markov chain on {-1, 0, +1} (index 0, 1, 2) of the tent-map increments for odd b.
struct MarkovTernaryLaw {
  int b = 3;
  std::array<Rational, 3> initial;
  std::array<std::array<Rational, 3>, 3> transition;

  static constexpr std::array<int, 3> states{-1, 0, 1};

  double initial_prob(int i) const { return boost::rational_cast<double>(initial[i]); }
  double transition_prob(int from, int to) const { return boost::rational_cast<double>(transition[from][to]); }
};

inline MarkovTernaryLaw markov_params(int b) {
  if (b < 3 || b % 2 == 0)
    throw std::invalid_argument("markov_params: b must be odd and >= 3, got " + std::to_string(b));
  const Rational side(b - 1, 2 * b);
  const Rational stay(b + 1, 2 * b);
  const Rational mid(1, b);
  const Rational zero(0);
  MarkovTernaryLaw law;
  law.b = b;
  law.initial = {side, mid, side};
  law.transition = {{{stay, zero, side}, {side, mid, side}, {side, zero, stay}}};
  return law;
}

// Increments lambda_{m,R_m} for an arbitrary base function.
struct GenericLaw {
  BaseFunction phi;
  int b = 2;
};

using IncrementLaw = std::variant<IIDTwoPointLaw, MarkovTernaryLaw, GenericLaw>;

enum class DistributionMode { Auto, GenericEnumeration, IIDTwoPoint, MarkovTernary };

inline const char* to_string(DistributionMode m) {
  switch (m) {
    case DistributionMode::Auto: return "auto";
    case DistributionMode::GenericEnumeration: return "generic";
    case DistributionMode::IIDTwoPoint: return "iid";
    case DistributionMode::MarkovTernary: return "markov";
  }
  return "?";
}

namespace detail {

inline std::optional<int> two_point_ell(const BaseFunction& phi, int b) {
  if (const auto* s = std::get_if<BaseFunction::SkewedTent>(&phi.kind())) {
    if (s->b == b) return s->ell;
    return std::nullopt;
  }
  if (std::holds_alternative<BaseFunction::Tent>(phi.kind()) && b % 2 == 0) return b / 2;
  return std::nullopt;
}

}  // namespace detail

inline IncrementLaw increment_law(const BaseFunction& phi, int b, DistributionMode mode = DistributionMode::Auto) {
  const auto ell = detail::two_point_ell(phi, b);
  const bool odd_tent = std::holds_alternative<BaseFunction::Tent>(phi.kind()) && b % 2 == 1;
  switch (mode) {
    case DistributionMode::Auto:
      if (ell) return iid_params(b, *ell);
      if (odd_tent) return markov_params(b);
      return GenericLaw{phi, b};
    case DistributionMode::IIDTwoPoint:
      if (!ell) throw std::invalid_argument("increment_law: IIDTwoPoint needs a skewed tent (or tent with even b)");
      return iid_params(b, *ell);
    case DistributionMode::MarkovTernary:
      if (!odd_tent) throw std::invalid_argument("increment_law: MarkovTernary needs the tent map with odd b");
      return markov_params(b);
    case DistributionMode::GenericEnumeration:
      return GenericLaw{phi, b};
  }
  throw std::invalid_argument("increment_law: unknown mode");
}

inline DistributionMode mode_of(const IncrementLaw& law) {
  switch (law.index()) {
    case 0: return DistributionMode::IIDTwoPoint;
    case 1: return DistributionMode::MarkovTernary;
    default: return DistributionMode::GenericEnumeration;
  }
}

// Bound C_Y on |Y_m|.
inline double law_bound(const IncrementLaw& law) {
  if (const auto* l = std::get_if<IIDTwoPointLaw>(&law)) return std::max(std::fabs(l->mu), std::fabs(l->nu));
  if (std::holds_alternative<MarkovTernaryLaw>(law)) return 1.0;
  return std::get<GenericLaw>(law).phi.lipschitz_constant();
}

// Number of leaves the enumeration of depth n visits (saturating).
inline std::uint64_t path_count(const IncrementLaw& law, int n) {
  constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
  if (n <= 0) return 1;
  if (const auto* g = std::get_if<GenericLaw>(&law)) {
    const std::uint64_t c = checked_ipow(static_cast<std::uint64_t>(g->b), n);
    return c == 0 ? cap : c;
  }
  if (n >= 62) return cap;
  if (std::holds_alternative<IIDTwoPointLaw>(law)) return std::uint64_t{1} << n;
  return (std::uint64_t{1} << (n + 1)) - 1;  // zero-run followed by a +-1 chain
}

namespace detail {

template <typename Visitor>
class PathWalker {
 public:
  PathWalker(const IncrementLaw& law, double gamma, int n, Visitor& visit)
      : law_(law), n_(n), visit_(visit), powers_(n + 1, 1.0) {
    for (int m = 1; m <= n; ++m) powers_[m] = std::pow(gamma, m);
  }

  void run() {
    if (n_ == 0) {
      visit_(0.0, 1.0, std::int8_t{0});
      return;
    }
    if (const auto* l = std::get_if<IIDTwoPointLaw>(&law_)) {
      iid(*l, 1, 0.0, 1.0);
    } else if (const auto* l = std::get_if<MarkovTernaryLaw>(&law_)) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) tp_[i][j] = l->transition_prob(i, j);
      for (int s = 0; s < 3; ++s) {
        const double pr = l->initial_prob(s);
        if (pr > 0.0) markov(1, s, powers_[1] * MarkovTernaryLaw::states[s], pr);
      }
    } else {
      const auto& g = std::get<GenericLaw>(law_);
      const std::uint64_t bn = checked_ipow(static_cast<std::uint64_t>(g.b), n_);
      if (bn == 0) throw budget_exceeded("path enumeration: b^n exceeds 63 bits");
      generic(g, 1, 0, 1, 0.0, 1.0 / static_cast<double>(bn));
    }
  }

 private:
  void iid(const IIDTwoPointLaw& l, int m, double s, double pr) {
    const double s_nu = s + powers_[m] * l.nu;
    const double s_mu = s + powers_[m] * l.mu;
    if (m == n_) {
      visit_(s_nu, pr * l.p, std::int8_t{1});
      visit_(s_mu, pr * (1.0 - l.p), std::int8_t{-1});
      return;
    }
    iid(l, m + 1, s_nu, pr * l.p);
    iid(l, m + 1, s_mu, pr * (1.0 - l.p));
  }

  void markov(int m, int state, double s, double pr) {
    if (m == n_) {
      visit_(s, pr, static_cast<std::int8_t>(MarkovTernaryLaw::states[state]));
      return;
    }
    for (int nx = 0; nx < 3; ++nx) {
      const double tp = tp_[state][nx];
      if (tp > 0.0) markov(m + 1, nx, s + powers_[m + 1] * MarkovTernaryLaw::states[nx], pr * tp);
    }
  }

  // r: R_{m-1}; scale: b^{m-1}
  void generic(const GenericLaw& g, int m, std::uint64_t r, std::uint64_t scale, double s, double leaf_prob) {
    const std::uint64_t bm = scale * static_cast<std::uint64_t>(g.b);
    const double denom = static_cast<double>(bm);
    for (int u = 0; u < g.b; ++u) {
      const std::uint64_t rm = r + static_cast<std::uint64_t>(u) * scale;
      const double y = g.phi.mean_slope(static_cast<double>(rm) / denom, 1.0 / denom);
      const double sm = s + powers_[m] * y;
      if (m == n_)
        visit_(sm, leaf_prob, std::int8_t{0});
      else
        generic(g, m + 1, rm, bm, sm, leaf_prob);
    }
  }

  const IncrementLaw& law_;
  int n_;
  Visitor& visit_;
  std::vector<double> powers_;
  std::array<std::array<double, 3>, 3> tp_{};
};

}  // namespace detail

// Visits every path of S_n = sum_{m=1}^n gamma^m Y_m as (value, probability, state).
// Paths are never merged.
template <typename Visitor>
void for_each_path(const IncrementLaw& law, double gamma, int n, Visitor&& visit) {
  if (n < 0) throw std::invalid_argument("for_each_path: n must be >= 0");
  detail::PathWalker<std::remove_reference_t<Visitor>> walker(law, gamma, n, visit);
  walker.run();
}

// E[f(S_n)] without materializing the atoms.
template <typename F>
double stream_expectation(const IncrementLaw& law, double gamma, int n, F&& f,
                          std::uint64_t budget = default_streaming_budget) {
  if (path_count(law, n) > budget)
    throw budget_exceeded("stream_expectation: " + std::to_string(path_count(law, n)) +
                          " paths exceed the budget of " + std::to_string(budget) + " at n=" + std::to_string(n));
  compensated_sum acc;
  for_each_path(law, gamma, n, [&](double v, double pr, std::int8_t) { acc.add(pr * f(v)); });
  return acc.value();
}

inline double stream_max_abs(const IncrementLaw& law, double gamma, int n,
                             std::uint64_t budget = default_streaming_budget) {
  if (path_count(law, n) > budget)
    throw budget_exceeded("stream_max_abs: path count exceeds the budget of " + std::to_string(budget) +
                          " at n=" + std::to_string(n));
  double mx = 0.0;
  for_each_path(law, gamma, n, [&](double v, double, std::int8_t) { mx = std::max(mx, std::fabs(v)); });
  return mx;
}

// Exact finite law of S_n = sum_{m<=n} (alpha b)^-m Y_m.
struct IncrementDistribution {
  int depth = 0;
  DistributionMode mode = DistributionMode::GenericEnumeration;
  std::vector<double> values;
  std::vector<double> probabilities;
  std::vector<std::int8_t> states;  // last Y sign (+1 nu / -1 mu for two-point laws), 0 for generic

  std::size_t size() const { return values.size(); }

  double total_probability() const {
    compensated_sum acc;
    for (double p : probabilities) acc.add(p);
    return acc.value();
  }

  double max_abs_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
  }
};

inline IncrementDistribution exact_partial_sum_distribution(const FractalSpec& spec, int n,
                                                            DistributionMode mode = DistributionMode::Auto,
                                                            std::uint64_t budget = default_enumeration_budget) {
  if (n < 0) throw std::invalid_argument("exact_partial_sum_distribution: n must be >= 0");
  const IncrementLaw law = increment_law(spec.phi(), spec.b(), mode);
  const std::uint64_t count = path_count(law, n);
  if (count > budget)
    throw budget_exceeded("exact_partial_sum_distribution: " + std::to_string(count) +
                          " atoms exceed the budget of " + std::to_string(budget) + " at n=" + std::to_string(n));
  IncrementDistribution dist;
  dist.depth = n;
  dist.mode = mode_of(law);
  dist.values.reserve(count);
  dist.probabilities.reserve(count);
  dist.states.reserve(count);
  for_each_path(law, spec.gamma(), n, [&](double v, double pr, std::int8_t st) {
    dist.values.push_back(v);
    dist.probabilities.push_back(pr);
    dist.states.push_back(st);
  });
  return dist;
}

inline double expected_abs_power(const IncrementDistribution& dist, double p) {
  if (!(p >= 0.0)) throw std::invalid_argument("expected_abs_power: p must be >= 0");
  compensated_sum acc;
  for (std::size_t i = 0; i < dist.size(); ++i) acc.add(dist.probabilities[i] * abs_pow(dist.values[i], p));
  return acc.value();
}

inline double expected_power(const IncrementDistribution& dist, int k) {
  if (k < 0) throw std::invalid_argument("expected_power: k must be >= 0");
  compensated_sum acc;
  for (std::size_t i = 0; i < dist.size(); ++i) acc.add(dist.probabilities[i] * int_pow(dist.values[i], k));
  return acc.value();
}

// V_{p,1,n}(f) = (|alpha|^p b)^n E|S_n|^p, from the law of the increments.
inline double variation_from_increments(const FractalSpec& spec, double p, int n, DistributionMode mode = DistributionMode::Auto,
                           std::uint64_t budget = default_enumeration_budget) {
  if (!(p >= 1.0)) throw std::invalid_argument("variation_from_increments: p must be >= 1");
  const auto dist = exact_partial_sum_distribution(spec, n, mode, budget);
  const double scale = std::pow(abs_pow(spec.alpha(), p) * spec.b(), n);
  return scale * expected_abs_power(dist, p);
}

}  // namespace fracvar
