#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracvar/base_function.hpp"
#include "fracvar/bernoulli_moments.hpp"
#include "fracvar/common.hpp"
#include "fracvar/fractal.hpp"
#include "fracvar/increment_model.hpp"
#include "fracvar/monte_carlo.hpp"
#include "fracvar/parallel.hpp"
#include "fracvar/partition_variation.hpp"

namespace fracvar {

enum class Regime { BoundedVariation, CriticalVanishing, Rough };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::BoundedVariation: return "BoundedVariation";
    case Regime::CriticalVanishing: return "CriticalVanishing";
    case Regime::Rough: return "Rough";
  }
  return "?";
}

struct DegenerateEvidence {
  double max_abs_Sn = 0.0;
  int depth = 0;
  double tail_bound = 0.0;   // C_Y |gamma|^{depth+1} / (1 - |gamma|)
  bool zero_candidate = false;
};

struct RegimeReport {
  Regime regime = Regime::Rough;
  double q = std::numeric_limits<double>::quiet_NaN();
  double hurst = std::numeric_limits<double>::quiet_NaN();
  std::optional<DegenerateEvidence> degenerate_evidence;
  std::optional<bool> sufficient_condition_holds;
  std::optional<int> sufficient_condition_witness;
};

inline constexpr int default_degeneracy_depth = 12;
inline constexpr double degeneracy_threshold = 1e-9;

// Regime from (|alpha|, b) alone. In the rough regime also attaches evidence
// about Z = 0: max |S_n| over the exact support. Z is a candidate for vanishing
// when that maximum is below 1e-9 or below the bound on |Z - S_n| itself.
inline RegimeReport classify(const FractalSpec& spec, int depth = default_degeneracy_depth,
                             std::uint64_t budget = default_streaming_budget) {
  RegimeReport rep;
  if (spec.is_critical()) {
    rep.regime = Regime::CriticalVanishing;
    return rep;
  }
  if (!spec.is_rough()) {
    rep.regime = Regime::BoundedVariation;
    return rep;
  }
  rep.regime = Regime::Rough;
  rep.q = spec.q_exponent();
  rep.hurst = 1.0 / rep.q;

  const IncrementLaw law = increment_law(spec.phi(), spec.b());
  int n = std::max(depth, 1);
  while (n > 1 && path_count(law, n) > budget) --n;
  DegenerateEvidence ev;
  ev.depth = n;
  ev.max_abs_Sn = stream_max_abs(law, spec.gamma(), n, budget);
  const double g = std::fabs(spec.gamma());
  ev.tail_bound = law_bound(law) * std::pow(g, n + 1) / (1.0 - g);
  ev.zero_candidate = ev.max_abs_Sn <= std::max(degeneracy_threshold, ev.tail_bound);
  rep.degenerate_evidence = ev;

  if (spec.alpha() > 0.0) {
    const auto sc = check_sufficient_condition(spec.phi(), spec.b());
    rep.sufficient_condition_holds = sc.holds;
    rep.sufficient_condition_witness = sc.witness_k;
  }
  return rep;
}

enum class SlopeMethod { Recursion, Enumeration, MonteCarlo };

inline const char* to_string(SlopeMethod m) {
  switch (m) {
    case SlopeMethod::Recursion: return "recursion";
    case SlopeMethod::Enumeration: return "enumeration";
    case SlopeMethod::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

struct SlopeParams {
  int depth = 0;                                 // 0: automatic
  double target_error = 1e-6;                    // enumeration depth target
  std::uint64_t budget = std::uint64_t{1} << 24;  // enumeration paths
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct SlopeResult {
  double q = 0.0;
  double slope = 0.0;  // E|Z|^q
  SlopeMethod method = SlopeMethod::Recursion;
  double error = 0.0;  // error bound (recursion, enumeration) or standard error (MC)
  int depth = 0;
  std::uint64_t samples = 0;
};

// E|Z|^q with q = -log_{|alpha|} b, the slope of t -> lim V_{q,t,n}.
inline SlopeResult variation_slope(const FractalSpec& spec, SlopeMethod method, const SlopeParams& params = {}) {
  if (!spec.is_rough()) throw regime_error("variation_slope: requires 1/b < |alpha| < 1");
  const double q = spec.q_exponent();
  const IncrementLaw law = increment_law(spec.phi(), spec.b());
  SlopeResult res;
  res.q = q;
  res.method = method;
  switch (method) {
    case SlopeMethod::Recursion: {
      int k = 0;
      if (!near_even_integer(q, 1e-9, k))
        throw std::invalid_argument("variation_slope: recursion needs an even integer q, got q=" + std::to_string(q));
      const auto* l = std::get_if<IIDTwoPointLaw>(&law);
      if (!l) throw std::invalid_argument("variation_slope: recursion needs a two-point i.i.d. increment law");
      res.slope = moments_recursive(l->mu, l->nu, l->p, spec.gamma(), k).moments[k];
      res.error = 0.0;
      return res;
    }
    case SlopeMethod::Enumeration: {
      const int n = params.depth > 0 ? params.depth
                                     : enumeration_depth(law, spec.gamma(), q, params.target_error, params.budget);
      const auto tm = abs_moment_enumerated(law, spec.gamma(), q, n, std::max(params.budget, path_count(law, n)));
      res.slope = tm.value;
      res.error = tm.error_bound;
      res.depth = n;
      return res;
    }
    case SlopeMethod::MonteCarlo: {
      const auto mc = mc_estimate(spec, q, false, params.depth, params.samples, params.seed, params.threads);
      res.slope = mc.estimate;
      res.error = mc.std_error;
      res.depth = mc.depth;
      res.samples = mc.samples;
      return res;
    }
  }
  throw std::invalid_argument("variation_slope: unknown method");
}

enum class SignedLimitKind { IdenticallyZero, Limit, OscillatingPair };

inline const char* to_string(SignedLimitKind k) {
  switch (k) {
    case SignedLimitKind::IdenticallyZero: return "IdenticallyZero";
    case SignedLimitKind::Limit: return "Limit";
    case SignedLimitKind::OscillatingPair: return "OscillatingPair";
  }
  return "?";
}

struct SignedLimitResult {
  int q = 3;
  SignedLimitKind kind = SignedLimitKind::IdenticallyZero;
  double value = 0.0;       // Limit
  double value_even_n = 0.0;  // OscillatingPair: limit along even n
  double value_odd_n = 0.0;   // and along odd n
};

// Limit of the signed q-th variation for a skewed tent (or a tent with even b),
// q = -log_{|alpha|} b odd.
inline SignedLimitResult signed_variation_limit(const FractalSpec& spec) {
  if (!spec.is_rough()) throw regime_error("signed_variation_limit: requires 1/b < |alpha| < 1");
  int q = 0;
  if (!near_odd_integer(spec.q_exponent(), 1e-9, q))
    throw std::invalid_argument("signed_variation_limit: q = " + std::to_string(spec.q_exponent()) +
                                " is not an odd integer (tolerance 1e-9)");
  const auto ell = detail::two_point_ell(spec.phi(), spec.b());
  if (!ell) throw std::invalid_argument("signed_variation_limit: needs a skewed tent base (or the tent with even b)");

  SignedLimitResult res;
  res.q = q;
  if (2 * *ell == spec.b()) {
    res.kind = SignedLimitKind::IdenticallyZero;
    return res;
  }
  const auto law = iid_params(spec.b(), *ell);
  const double m = moments_recursive(law.mu, law.nu, law.p, spec.gamma(), q).moments[q];
  if (spec.alpha() > 0.0) {
    res.kind = SignedLimitKind::Limit;
    res.value = m;
  } else {
    res.kind = SignedLimitKind::OscillatingPair;
    res.value_even_n = m;
    res.value_odd_n = -m;
  }
  return res;
}

struct SweepRow {
  double H = 0.0;
  double q = 0.0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double error = std::numeric_limits<double>::quiet_NaN();
  SlopeMethod method = SlopeMethod::MonteCarlo;
  std::string error_tag;  // empty on success

  bool ok() const { return error_tag.empty(); }
};

inline std::vector<double> default_hurst_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(i / 20.0);
  return g;
}

// Slope E|Z|^{1/H} along alpha = sign * b^-H. Rows are independent and kept in
// grid order; a failing row carries an error tag and the sweep continues.
inline std::vector<SweepRow> hurst_sweep(const BaseFunction& phi, int b, const std::vector<double>& grid,
                                         SlopeMethod method = SlopeMethod::MonteCarlo, SlopeParams params = {},
                                         int sign = 1) {
  const unsigned outer = resolve_threads(params.threads);
  params.threads = 1;
  return parallel_map<SweepRow>(grid.size(), outer, [&](std::size_t i) {
    SweepRow row;
    row.H = grid[i];
    row.q = grid[i] > 0.0 ? 1.0 / grid[i] : std::numeric_limits<double>::infinity();
    row.method = method;
    try {
      if (!(grid[i] > 0.0 && grid[i] < 1.0)) throw std::invalid_argument("H must lie in (0,1)");
      const auto spec = FractalSpec::from_hurst(phi, b, grid[i], sign);
      const auto r = variation_slope(spec, method, params);
      row.slope = r.slope;
      row.error = r.error;
    } catch (const std::exception& e) {
      row.error_tag = e.what();
    }
    return row;
  });
}

enum class Behavior { Vanishing, Finite, Diverging };

inline const char* to_string(Behavior b) {
  switch (b) {
    case Behavior::Vanishing: return "vanishing";
    case Behavior::Finite: return "finite";
    case Behavior::Diverging: return "diverging";
  }
  return "?";
}

struct ConvergenceReport {
  VariationSeries series;
  double predicted_rate = 0.0;  // d/dn log V_{p,t,n}
  double observed_rate = 0.0;   // least-squares slope of log V against n
  Behavior predicted = Behavior::Finite;
  Behavior observed = Behavior::Finite;
  bool agree() const { return predicted == observed; }
};

inline constexpr double convergence_rate_threshold = 0.02;

namespace detail {

inline Behavior behavior_of_rate(double rate) {
  if (rate > convergence_rate_threshold) return Behavior::Diverging;
  if (rate < -convergence_rate_threshold) return Behavior::Vanishing;
  return Behavior::Finite;
}

}  // namespace detail

// Growth of log V_{p,t,n} in n against the prediction n log(|alpha|^p b) in the
// rough regime, n (1 - p) log b otherwise. Critical p = 1 grows sub-exponentially
// and is predicted as diverging.
inline ConvergenceReport convergence_report(const FractalSpec& spec, double p, double t, int n_min, int n_max,
                                            std::uint64_t budget = default_partition_budget, unsigned threads = 1) {
  ConvergenceReport rep;
  rep.series = variation_series(spec, p, t, n_min, n_max, false, budget, threads);
  const double lb = std::log(static_cast<double>(spec.b()));
  if (spec.is_rough()) {
    rep.predicted_rate = p * std::log(std::fabs(spec.alpha())) + lb;
    const double q = spec.q_exponent();
    rep.predicted = std::fabs(p - q) <= 1e-9 * q ? Behavior::Finite
                                                 : (p < q ? Behavior::Diverging : Behavior::Vanishing);
  } else {
    rep.predicted_rate = (1.0 - p) * lb;
    const bool unit = std::fabs(p - 1.0) <= 1e-12;
    rep.predicted = unit ? (spec.is_critical() ? Behavior::Diverging : Behavior::Finite) : Behavior::Vanishing;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  bool hit_zero = false;
  for (const auto& [n, v] : rep.series.values) {
    if (!(v > 0.0)) {
      hit_zero = true;
      continue;
    }
    const double y = std::log(v);
    sx += n;
    sy += y;
    sxx += static_cast<double>(n) * n;
    sxy += n * y;
    ++cnt;
  }
  if (cnt >= 2) {
    rep.observed_rate = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    rep.observed = detail::behavior_of_rate(rep.observed_rate);
  } else {
    rep.observed_rate = hit_zero ? -std::numeric_limits<double>::infinity() : 0.0;
    rep.observed = hit_zero ? Behavior::Vanishing : Behavior::Finite;
  }
  return rep;
}

}  // namespace fracvar
