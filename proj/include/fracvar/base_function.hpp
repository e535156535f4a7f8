#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fracvar/common.hpp"

namespace fracvar {

namespace detail {

// sin(2*pi*r) for r in [0,1), with exact zeros at r = 0 and r = 1/2.
inline double sin_2pi(double r) {
  double sign = 1.0;
  if (r >= 0.5) {
    r -= 0.5;
    sign = -1.0;
  }
  if (r > 0.25) r = 0.5 - r;
  return sign * std::sin(2.0 * std::numbers::pi * r);
}

// cos(2*pi*r) for r in [0,1).
inline double cos_2pi(double r) {
  if (r > 0.5) r = 1.0 - r;
  // r in [0, 1/2]: cos(2 pi r) = sin(2 pi (1/4 - r))
  const double s = 0.25 - r;
  return s >= 0.0 ? sin_2pi(s) : -sin_2pi(-s);
}

inline double frac(double t) { return t - std::floor(t); }

}  // namespace detail

struct Breakpoint {
  double t;
  double value;
};

// A period-1 Lipschitz map vanishing on the integers, the building block
// f(t) = sum_m alpha^m phi(b^m t). Immutable after construction.
class BaseFunction {
 public:
  struct Tent {};
  struct SkewedTent {
    int ell;
    int b;
  };
  struct Sine {
    double amplitude;
  };
  struct Degenerate {
    std::shared_ptr<const BaseFunction> inner;
    double alpha;
    int b;
  };
  struct PiecewiseLinear {
    std::vector<Breakpoint> breakpoints;
  };
  using Kind = std::variant<Tent, SkewedTent, Sine, Degenerate, PiecewiseLinear>;

  static BaseFunction tent() {
    return BaseFunction(Tent{}, {{0.0, 0.0}, {0.5, 0.5}, {1.0, 0.0}}, "tent");
  }

  // Peak value 1/2 at ell/b.
  static BaseFunction skewed_tent(int ell, int b) {
    if (b < 2) throw std::invalid_argument("skewed_tent: b must be >= 2");
    if (ell < 1 || ell > b - 1)
      throw std::invalid_argument("skewed_tent: need 1 <= l <= b-1, got l=" + std::to_string(ell) +
                                  ", b=" + std::to_string(b));
    const double peak = static_cast<double>(ell) / b;
    return BaseFunction(SkewedTent{ell, b}, {{0.0, 0.0}, {peak, 0.5}, {1.0, 0.0}},
                        "skewed:l=" + std::to_string(ell));
  }

  static BaseFunction sine(double amplitude) {
    if (!std::isfinite(amplitude)) throw std::invalid_argument("sine: amplitude must be finite");
    return BaseFunction(Sine{amplitude}, {}, "sine:amp=" + format_number(amplitude));
  }

  // phi(t) = g(t) - alpha g(b t); the resulting f equals g.
  static BaseFunction degenerate(BaseFunction inner, double alpha, int b) {
    if (b < 2) throw std::invalid_argument("degenerate: b must be >= 2");
    if (!std::isfinite(alpha)) throw std::invalid_argument("degenerate: alpha must be finite");
    std::string label = "degenerate:inner=" + inner.label();
    return BaseFunction(Degenerate{std::make_shared<const BaseFunction>(std::move(inner)), alpha, b},
                        {}, std::move(label));
  }

  // Breakpoints must run strictly increasing from t=0 to t=1. Values are not
  // forced to vanish at the ends; check_admissible reports such violations.
  static BaseFunction piecewise_linear(std::vector<Breakpoint> breakpoints, std::string label = "pwl") {
    if (breakpoints.size() < 2) throw std::invalid_argument("piecewise_linear: need at least two breakpoints");
    if (breakpoints.front().t != 0.0 || breakpoints.back().t != 1.0)
      throw std::invalid_argument("piecewise_linear: breakpoints must start at t=0 and end at t=1");
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
      if (!(breakpoints[i].t > breakpoints[i - 1].t))
        throw std::invalid_argument("piecewise_linear: breakpoint t values must be strictly increasing");
      if (!std::isfinite(breakpoints[i].value))
        throw std::invalid_argument("piecewise_linear: non-finite breakpoint value");
    }
    auto copy = breakpoints;
    return BaseFunction(PiecewiseLinear{std::move(breakpoints)}, std::move(copy), std::move(label));
  }

  // scale * tent, as a piecewise-linear map.
  static BaseFunction scaled_tent(double scale) {
    return piecewise_linear({{0.0, 0.0}, {0.5, 0.5 * scale}, {1.0, 0.0}}, "tent:scale=" + format_number(scale));
  }

  const Kind& kind() const { return kind_; }
  const std::string& label() const { return label_; }

  bool is_piecewise_linear() const { return !pieces_.empty(); }
  const std::vector<Breakpoint>& pieces() const { return pieces_; }

  double operator()(double t) const {
    const double r = detail::frac(t);
    return std::visit([&](const auto& k) { return eval_reduced(k, r); }, kind_);
  }

  // (phi(x+h) - phi(x)) / h, evaluated without cancellation. h == 0 gives the
  // right derivative at x.
  double mean_slope(double x, double h) const {
    if (h < 0.0) throw std::invalid_argument("mean_slope: h must be >= 0");
    const double r = detail::frac(x);
    if (const auto* s = std::get_if<Sine>(&kind_)) {
      const double ratio = h > 1e-12 ? std::sin(std::numbers::pi * h) / h : std::numbers::pi;
      const double mid = detail::frac(r + 0.5 * h);
      return s->amplitude * 2.0 * detail::cos_2pi(mid) * ratio;
    }
    if (const auto* d = std::get_if<Degenerate>(&kind_)) {
      const double bx = detail::frac(d->b * r);
      return d->inner->mean_slope(r, h) - d->alpha * d->b * d->inner->mean_slope(bx, d->b * h);
    }
    return pwl_mean_slope(r, h);
  }

  double increment(double x, double h) const { return mean_slope(x, h) * h; }

  double lipschitz_constant() const {
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Tent>) {
            return 1.0;
          } else if constexpr (std::is_same_v<K, SkewedTent>) {
            return std::max(k.b / (2.0 * k.ell), k.b / (2.0 * (k.b - k.ell)));
          } else if constexpr (std::is_same_v<K, Sine>) {
            return 2.0 * std::numbers::pi * std::fabs(k.amplitude);
          } else if constexpr (std::is_same_v<K, Degenerate>) {
            return k.inner->lipschitz_constant() * (1.0 + std::fabs(k.alpha) * k.b);
          } else {
            double m = 0.0;
            for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) m = std::max(m, std::fabs(slopes_[i]));
            return m;
          }
        },
        kind_);
  }

  double sup_norm() const {
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Tent> || std::is_same_v<K, SkewedTent>) {
            return 0.5;
          } else if constexpr (std::is_same_v<K, Sine>) {
            return std::fabs(k.amplitude);
          } else if constexpr (std::is_same_v<K, Degenerate>) {
            return k.inner->sup_norm() * (1.0 + std::fabs(k.alpha));
          } else {
            double m = 0.0;
            for (const auto& bp : pieces_) m = std::max(m, std::fabs(bp.value));
            return m;
          }
        },
        kind_);
  }

  static std::string format_number(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
  }

 private:
  BaseFunction(Kind kind, std::vector<Breakpoint> pieces, std::string label)
      : kind_(std::move(kind)), pieces_(std::move(pieces)), label_(std::move(label)) {
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
      slopes_.push_back((pieces_[i + 1].value - pieces_[i].value) / (pieces_[i + 1].t - pieces_[i].t));
  }

  static double eval_reduced(const Tent&, double r) { return std::min(r, 1.0 - r); }

  static double eval_reduced(const SkewedTent& k, double r) {
    if (r * k.b <= k.ell) return r * k.b / (2.0 * k.ell);
    return (1.0 - r) * k.b / (2.0 * (k.b - k.ell));
  }

  static double eval_reduced(const Sine& k, double r) { return k.amplitude * detail::sin_2pi(r); }

  static double eval_reduced(const Degenerate& k, double r) {
    return (*k.inner)(r) - k.alpha * (*k.inner)(k.b * r);
  }

  double eval_reduced(const PiecewiseLinear&, double r) const {
    const std::size_t j = piece_index(r);
    return pieces_[j].value + slopes_[j] * (r - pieces_[j].t);
  }

  std::size_t piece_index(double r) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), r,
                               [](double v, const Breakpoint& bp) { return v < bp.t; });
    std::size_t j = static_cast<std::size_t>(it - pieces_.begin());
    j = j == 0 ? 0 : j - 1;
    return std::min(j, pieces_.size() - 2);
  }

  // Splits [r, r+h] at the breakpoints and sums slope * overlap. Points within
  // a few ulps of a breakpoint are snapped onto it.
  double pwl_mean_slope(double r, double h) const {
    constexpr double slack = 4.0 * std::numeric_limits<double>::epsilon();
    std::size_t j = piece_index(r);
    if (pieces_[j + 1].t - r <= slack && j + 2 < pieces_.size()) ++j;
    const double room = pieces_[j + 1].t - r;
    if (h <= room + slack) return slopes_[j];
    compensated_sum acc;
    acc.add(slopes_[j] * room);
    double remaining = h - room;
    std::size_t idx = j + 1;
    while (remaining > 0.0) {
      if (idx + 1 == pieces_.size()) idx = 0;
      const double len = pieces_[idx + 1].t - pieces_[idx].t;
      const double take = std::min(len, remaining);
      acc.add(slopes_[idx] * take);
      remaining -= take;
      ++idx;
    }
    return acc.value() / h;
  }

  Kind kind_;
  std::vector<Breakpoint> pieces_;
  std::vector<double> slopes_;
  std::string label_;
};

inline double eval_phi(const BaseFunction& phi, double t) { return phi(t); }

struct AdmissibilityReport {
  bool periodic = true;
  bool vanishes_on_integers = true;
  bool lipschitz_ok = true;
  double max_period_defect = 0.0;
  double max_integer_value = 0.0;
  double max_lipschitz_ratio = 0.0;  // sampled quotient / lipschitz_constant

  bool all() const { return periodic && vanishes_on_integers && lipschitz_ok; }
};

// Sampled checks of the standing assumptions; failures are reported, never thrown.
inline AdmissibilityReport check_admissible(const BaseFunction& phi, int sample_count, double tolerance) {
  if (sample_count < 2) throw std::invalid_argument("check_admissible: sample_count must be >= 2");
  if (!(tolerance > 0.0)) throw std::invalid_argument("check_admissible: tolerance must be > 0");

  AdmissibilityReport rep;
  const double lip = phi.lipschitz_constant();

  for (int i = 0; i < sample_count; ++i) {
    const double t = 3.0 * i / sample_count;
    const double d = std::fabs(phi(t + 1.0) - phi(t));
    rep.max_period_defect = std::max(rep.max_period_defect, d);
  }
  rep.periodic = rep.max_period_defect <= tolerance;

  // Values at the integers, plus one-sided limits: a map that does not close
  // up at t = 1 shows a jump next to the integer even though phi(1) = phi(0).
  const double delta = 1e-7;
  bool jump = false;
  for (int k = -2; k <= 3; ++k) {
    rep.max_integer_value = std::max(rep.max_integer_value, std::fabs(phi(k)));
    for (double side : {-delta, delta}) {
      if (std::fabs(phi(k + side)) > lip * delta * (1.0 + tolerance) + tolerance) jump = true;
    }
  }
  rep.vanishes_on_integers = rep.max_integer_value <= tolerance && !jump;

  const double step = 3.0 / sample_count;
  double prev = phi(-1.0);
  for (int i = 1; i <= sample_count; ++i) {
    const double t0 = -1.0 + (i - 1) * step;
    const double t1 = -1.0 + i * step;
    const double cur = phi(t1);
    const double q = std::fabs(cur - prev) / (t1 - t0);
    prev = cur;
    if (lip > 0.0)
      rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, q / lip);
    else if (q > 0.0)
      rep.max_lipschitz_ratio = std::numeric_limits<double>::infinity();
  }
  rep.lipschitz_ok = rep.max_lipschitz_ratio <= 1.0 + tolerance;
  return rep;
}

struct SufficientConditionResult {
  bool holds = false;
  std::optional<int> witness_k;
};

// {0} != {phi(b^-k) : k <= k_max} subset of [0, inf), checked up to k_max.
inline SufficientConditionResult check_sufficient_condition(const BaseFunction& phi, int b, int k_max = 60) {
  if (b < 2) throw std::invalid_argument("check_sufficient_condition: b must be >= 2");
  if (k_max < 1) throw std::invalid_argument("check_sufficient_condition: k_max must be >= 1");
  SufficientConditionResult res;
  for (int k = 1; k <= k_max; ++k) {
    const double v = phi(std::pow(static_cast<double>(b), -k));
    if (v < 0.0) return {false, std::nullopt};
    if (v > 0.0 && !res.witness_k) res.witness_k = k;
  }
  res.holds = res.witness_k.has_value();
  return res;
}

}  // namespace fracvar
