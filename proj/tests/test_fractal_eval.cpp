#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "fracvar/fractal.hpp"

using namespace fracvar;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Direct series in 50-digit arithmetic; the tail is below 1e-30.
big reference_f(const BaseFunction& phi, int b, double alpha, double t) {
  if (t >= 1.0) t = 1.0;
  big x = t, sum = 0, w = 1;
  const big a = alpha;
  for (int m = 0; m < 400; ++m) {
    const big r = x - floor(x);
    big v;
    if (std::holds_alternative<BaseFunction::Tent>(phi.kind())) {
      v = r < 0.5 ? r : 1 - r;
    } else if (const auto* s = std::get_if<BaseFunction::SkewedTent>(&phi.kind())) {
      const big peak = big(s->ell) / s->b;
      v = r <= peak ? r * s->b / (2 * s->ell) : (1 - r) * s->b / (2 * (s->b - s->ell));
    } else if (const auto* s = std::get_if<BaseFunction::Sine>(&phi.kind())) {
      v = s->amplitude * sin(2 * boost::math::constants::pi<big>() * r);
    }
    sum += w * v;
    w *= a;
    if (abs(w) < 1e-32) break;
    x = r * b;
  }
  return sum;
}

}  // namespace

TEST(EvalF, Examples) {
  const FractalSpec takagi(BaseFunction::tent(), 2, 0.5);
  EXPECT_DOUBLE_EQ(eval_f(takagi, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(eval_f(takagi, 0.25), 0.5);
  EXPECT_EQ(eval_f(takagi, 0.0), 0.0);
  EXPECT_EQ(eval_f(FractalSpec(BaseFunction::sine(1.0), 3, 0.6), 0.0), 0.0);
}

TEST(EvalF, ExtendedBeyondOne) {
  const FractalSpec spec(BaseFunction::sine(0.5), 2, 0.7);
  EXPECT_EQ(eval_f(spec, 1.0), 0.0);
  EXPECT_EQ(eval_f(spec, 1.5), eval_f(spec, 1.0));
}

TEST(EvalF, Rejects) {
  const FractalSpec spec(BaseFunction::tent(), 2, 0.5);
  EXPECT_THROW(eval_f(spec, 0.5, 0.0), std::invalid_argument);
  EXPECT_THROW(eval_f(spec, 0.5, -1.0), std::invalid_argument);
  EXPECT_THROW(eval_f(spec, -0.1), std::invalid_argument);
}

TEST(EvalFBadic, Examples) {
  const FractalSpec takagi(BaseFunction::tent(), 2, 0.5);
  EXPECT_DOUBLE_EQ(eval_f_badic(takagi, 1, 1), 0.5);
  for (const auto& spec : {takagi, FractalSpec(BaseFunction::sine(0.5), 3, -0.7)}) {
    EXPECT_EQ(eval_f_badic(spec, 0, 5), 0.0);
    EXPECT_NEAR(eval_f_badic(spec, checked_ipow(spec.b(), 3), 3), 0.0, 1e-15);
  }
  EXPECT_THROW(eval_f_badic(takagi, 9, 3), std::out_of_range);
  EXPECT_THROW(eval_f_badic(takagi, 0, -1), std::invalid_argument);
}

TEST(FractalSpec, Validation) {
  EXPECT_THROW(FractalSpec(BaseFunction::tent(), 1, 0.5), std::invalid_argument);
  EXPECT_THROW(FractalSpec(BaseFunction::tent(), 2, 0.0), std::invalid_argument);
  EXPECT_THROW(FractalSpec(BaseFunction::tent(), 2, 1.0), std::invalid_argument);
  EXPECT_THROW(FractalSpec(BaseFunction::tent(), 2, -1.2), std::invalid_argument);
  EXPECT_THROW(FractalSpec(BaseFunction::skewed_tent(1, 3), 4, 0.5), std::invalid_argument);
}

TEST(Exponents, Examples) {
  const FractalSpec s2(BaseFunction::tent(), 2, std::pow(2.0, -0.5));
  EXPECT_NEAR(q_exponent(s2), 2.0, 1e-12);
  EXPECT_NEAR(hurst(s2), 0.5, 1e-12);
  const FractalSpec s3(BaseFunction::tent(), 3, std::pow(3.0, -1.0 / 3.0));
  EXPECT_NEAR(q_exponent(s3), 3.0, 1e-12);
  EXPECT_NEAR(hurst(s3), 1.0 / 3.0, 1e-12);
  EXPECT_THROW(q_exponent(FractalSpec(BaseFunction::tent(), 2, 0.25)), regime_error);
  EXPECT_THROW(q_exponent(FractalSpec(BaseFunction::tent(), 2, 0.5)), regime_error);
}

TEST(Exponents, FromHurstIsExact) {
  const auto s = FractalSpec::from_hurst(BaseFunction::tent(), 3, 1.0 / 3.0, -1);
  EXPECT_EQ(s.q_exponent(), 3.0);
  EXPECT_LT(s.alpha(), 0.0);
  for (double H : {0.1, 0.3, 0.77}) {
    const auto t = FractalSpec::from_hurst(BaseFunction::sine(1), 4, H);
    EXPECT_GT(t.q_exponent(), 1.0);
    EXPECT_NEAR(t.q_exponent() * t.hurst(), 1.0, 1e-15);
  }
}

TEST(Properties, TruncationConsistency) {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& spec : {FractalSpec(BaseFunction::tent(), 2, 0.7), FractalSpec(BaseFunction::sine(0.5), 3, -0.8),
                           FractalSpec(BaseFunction::skewed_tent(2, 5), 5, 0.5)}) {
    for (int i = 0; i < 1000; ++i) {
      const double t = u(eng);
      ASSERT_LE(std::fabs(eval_f(spec, t, 1e-10) - eval_f(spec, t, 1e-14)), 2e-10);
    }
  }
}

TEST(Properties, AgreesWithHighPrecisionSeries) {
  std::mt19937_64 eng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& spec : {FractalSpec(BaseFunction::tent(), 2, 0.7), FractalSpec(BaseFunction::sine(0.5), 3, -0.8),
                           FractalSpec(BaseFunction::skewed_tent(1, 3), 3, 0.6)}) {
    for (int i = 0; i < 200; ++i) {
      const double t = u(eng);
      const double ref = static_cast<double>(reference_f(spec.phi(), spec.b(), spec.alpha(), t));
      ASSERT_NEAR(eval_f(spec, t, 1e-13), ref, 2e-13) << spec.phi().label() << " t=" << t;
    }
  }
}

TEST(Properties, BadicExactness) {
  for (const auto& spec : {FractalSpec(BaseFunction::tent(), 2, 0.6), FractalSpec(BaseFunction::sine(0.5), 3, 0.7),
                           FractalSpec(BaseFunction::skewed_tent(1, 3), 3, -0.5)}) {
    const double tol = 1e-12;
    for (int n = 0; n <= 8; ++n) {
      const std::uint64_t bn = checked_ipow(spec.b(), n);
      for (std::uint64_t k = 0; k <= bn; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(bn);
        ASSERT_LE(std::fabs(eval_f(spec, t, tol) - eval_f_badic(spec, k, n)), tol + 1e-12)
            << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Properties, BadicValuesMatchHighPrecision) {
  const FractalSpec spec(BaseFunction::sine(0.5), 2, 0.7);
  for (std::uint64_t k = 0; k <= 64; ++k) {
    const double ref = static_cast<double>(reference_f(spec.phi(), 2, 0.7, k / 64.0));
    ASSERT_NEAR(eval_f_badic(spec, k, 6), ref, 1e-14);
  }
}

TEST(Properties, SelfSimilarityAtRoot) {
  std::mt19937_64 eng(13);
  for (int b : {2, 3, 4}) {
    const FractalSpec spec(BaseFunction::sine(0.5), b, 0.75);
    const double tol = 1e-12;
    for (int i = 0; i < 500; ++i) {
      // t = j 2^-20 <= 1/b, so b t is exact; f is only Hoelder, a rounded b t would not do.
      const double t = static_cast<double>(eng() % ((1u << 20) / b + 1)) * std::ldexp(1.0, -20);
      const double lhs = eval_f(spec, t, tol);
      const double rhs = spec.phi()(t) + spec.alpha() * eval_f(spec, b * t, tol);
      ASSERT_LE(std::fabs(lhs - rhs), 2 * tol + 1e-14) << "b=" << b << " t=" << t;
    }
  }
}
