#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>

#include "fracvar/common.hpp"
#include "fracvar/fractal.hpp"
#include "fracvar/increment_model.hpp"
#include "fracvar/parallel.hpp"

namespace fracvar {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed of chunk c: a fixed function of (seed, c).
inline std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) {
  return splitmix64(splitmix64(seed) ^ (chunk * 0xD1B54A32D192ED03ull + 1));
}

// Uniform on {0, ..., n-1} by rejection (no modulo bias).
template <typename Engine>
std::uint64_t uniform_below(Engine& eng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t r;
  do {
    r = eng();
  } while (r < threshold);
  return r % n;
}

// Running mean / M2 (Welford), merged with Chan's formula.
struct RunningStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const RunningStats& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(count + o.count);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.count) / n;
    m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / n;
    count += o.count;
  }

  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double std_error() const { return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

struct McResult {
  double estimate = 0.0;
  double std_error = 0.0;
  int depth = 0;
  std::uint64_t samples = 0;
};

inline constexpr std::uint64_t mc_chunk_samples = 1u << 16;

// Smallest N with C |gamma|^{N+1} / (1 - |gamma|) <= resolution.
inline int mc_default_depth(double bound, double abs_gamma, double resolution = 1e-6) {
  if (!(abs_gamma < 1.0)) throw regime_error("mc_default_depth: requires |gamma| < 1");
  if (bound == 0.0) return 1;
  int n = 1;
  while (bound * std::pow(abs_gamma, n + 1) / (1.0 - abs_gamma) > resolution) {
    ++n;
    if (n > 100000) throw regime_error("mc_default_depth: gamma too close to 1");
  }
  return n;
}

namespace detail {

class IncrementSampler {
 public:
  IncrementSampler(const IncrementLaw& law, int depth) : law_(law), depth_(depth) {
    if (const auto* g = std::get_if<GenericLaw>(&law_)) {
      steps_.resize(depth + 1);
      for (int m = 1; m <= depth; ++m) steps_[m] = std::pow(static_cast<double>(g->b), -m);
    }
  }

  // One draw of S_depth = sum gamma^m Y_m.
  template <typename Engine>
  double draw(Engine& eng, double gamma) const {
    double s = 0.0;
    double w = 1.0;
    if (const auto* l = std::get_if<IIDTwoPointLaw>(&law_)) {
      const auto b = static_cast<std::uint64_t>(l->b);
      const auto ell = static_cast<std::uint64_t>(l->ell);
      for (int m = 1; m <= depth_; ++m) {
        w *= gamma;
        s += w * (uniform_below(eng, b) < ell ? l->nu : l->mu);
      }
    } else if (const auto* l = std::get_if<MarkovTernaryLaw>(&law_)) {
      // Entries of the chain are multiples of 1/(2b): draw v uniform on {0..2b-1}.
      const auto b = static_cast<std::uint64_t>(l->b);
      int state = 0;
      for (int m = 1; m <= depth_; ++m) {
        const std::uint64_t v = uniform_below(eng, 2 * b);
        if (m == 1 || state == 0) {
          state = v < b - 1 ? -1 : (v < b + 1 ? 0 : 1);
        } else if (v >= b + 1) {
          state = -state;
        }
        w *= gamma;
        s += w * state;
      }
    } else {
      const auto& g = std::get<GenericLaw>(law_);
      const auto b = static_cast<std::uint64_t>(g.b);
      double x = 0.0;
      for (int m = 1; m <= depth_; ++m) {
        x = (static_cast<double>(uniform_below(eng, b)) + x) / static_cast<double>(b);
        w *= gamma;
        s += w * g.phi.mean_slope(x, steps_[m]);
      }
    }
    return s;
  }

 private:
  const IncrementLaw& law_;
  int depth_;
  std::vector<double> steps_;
};

}  // namespace detail

// Monte Carlo estimate of E|S_depth|^p (or E[S_depth^q] when signed_power).
// Reproducible for fixed (seed, samples): chunks of mc_chunk_samples draws use
// seeds derived from (seed, chunk index) and are merged in index order.
inline McResult mc_estimate(const FractalSpec& spec, double p, bool signed_power, int depth, std::uint64_t samples,
                            std::uint64_t seed, unsigned threads = 0) {
  if (!spec.is_rough()) throw regime_error("mc_estimate: requires |alpha| > 1/b (gamma < 1)");
  if (samples < 2) throw std::invalid_argument("mc_estimate: need at least 2 samples");
  int q = 0;
  if (signed_power) {
    if (!near_odd_integer(p, 0.0, q) && !near_even_integer(p, 0.0, q))
      throw std::invalid_argument("mc_estimate: signed power needs an integer exponent");
    if (q < 0) throw std::invalid_argument("mc_estimate: exponent must be >= 0");
  } else if (!(p >= 0.0)) {
    throw std::invalid_argument("mc_estimate: p must be >= 0");
  }
  const IncrementLaw law = increment_law(spec.phi(), spec.b());
  const double gamma = spec.gamma();
  if (depth <= 0) depth = mc_default_depth(law_bound(law), std::fabs(gamma));

  const detail::IncrementSampler sampler(law, depth);
  const std::uint64_t chunks = (samples + mc_chunk_samples - 1) / mc_chunk_samples;
  auto parts = parallel_map<RunningStats>(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
    std::mt19937_64 eng(chunk_seed(seed, c));
    const std::uint64_t lo = c * mc_chunk_samples;
    const std::uint64_t hi = std::min(samples, lo + mc_chunk_samples);
    RunningStats st;
    for (std::uint64_t i = lo; i < hi; ++i) {
      const double s = sampler.draw(eng, gamma);
      st.add(signed_power ? int_pow(s, q) : abs_pow(s, p));
    }
    return st;
  });
  RunningStats total;
  for (const auto& part : parts) total.merge(part);
  return {total.mean, total.std_error(), depth, samples};
}

}  // namespace fracvar
