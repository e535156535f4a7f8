#include <cmath>
#include <random>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "fracvar/bernoulli_moments.hpp"
#include "fracvar/monte_carlo.hpp"

using namespace fracvar;
using boost::multiprecision::cpp_rational;

namespace {

// Independent route: cumulants of Z = sum gamma^m Y_m are kappa_j(Y) gamma^j / (1 - gamma^j);
// raw moments then follow from m_n = sum_{k=1}^n C(n-1,k-1) kappa_k m_{n-k}.
std::vector<double> moments_from_cumulants(double mu, double nu, double p, double gamma, int K) {
  std::vector<double> ym(K + 1);
  for (int i = 0; i <= K; ++i) ym[i] = p * std::pow(nu, i) + (1 - p) * std::pow(mu, i);
  auto C = [](int n, int k) { return boost::math::binomial_coefficient<double>(n, k); };
  std::vector<double> kappa(K + 1, 0.0);
  for (int n = 1; n <= K; ++n) {
    double s = ym[n];
    for (int k = 1; k < n; ++k) s -= C(n - 1, k - 1) * kappa[k] * ym[n - k];
    kappa[n] = s;
  }
  std::vector<double> zm(K + 1, 0.0);
  zm[0] = 1.0;
  for (int n = 1; n <= K; ++n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double gk = std::pow(gamma, k);
      s += C(n - 1, k - 1) * kappa[k] * gk / (1 - gk) * zm[n - k];
    }
    zm[n] = s;
  }
  return zm;
}

}  // namespace

TEST(Moments, Examples) {
  const auto l = iid_params(3, 1);
  const double g = std::pow(3.0, -2.0 / 3.0);
  const auto t = moments_recursive(l.mu, l.nu, l.p, g, 3);
  EXPECT_EQ(t.moments[0], 1.0);
  EXPECT_NEAR(t.moments[1], 0.0, 1e-15);
  EXPECT_NEAR(t.moments[3], 27.0 / 256.0, 1e-14);

  const auto l6 = iid_params(6, 5);
  const double g6 = std::pow(6.0, -2.0 / 3.0);
  EXPECT_NEAR(moments_recursive(l6.mu, l6.nu, l6.p, g6, 3).moments[3], -108.0 / 875.0, 1e-14);
}

TEST(Moments, SymmetricLaw) {
  const auto t = moments_recursive(-1.0, 1.0, 0.5, 0.5, 5);
  EXPECT_NEAR(t.moments[2], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.moments[1], 0.0, 1e-16);
  EXPECT_NEAR(t.moments[3], 0.0, 1e-16);
  EXPECT_NEAR(t.moments[5], 0.0, 1e-16);
}

TEST(Moments, Rejects) {
  EXPECT_THROW(moments_recursive(-1, 1, 0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(moments_recursive(-1, 1, 0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(moments_recursive(-1, 1, 0.5, 0.0), std::invalid_argument);
  EXPECT_THROW(moments_recursive(-1, 1, 0.5, 0.5, -1), std::invalid_argument);
  EXPECT_THROW(moments_recursive(NAN, 1, 0.5, 0.5), std::invalid_argument);
}

TEST(Moments, ExactRationalRecursion) {
  // b = 3, l = 1 with a rational gamma: exact values, and the double version agrees.
  const cpp_rational mu(-3, 4), nu(3, 2), p(1, 3), g(1, 2);
  const auto ex = moments_recursive_exact(mu, nu, p, g, 8);
  EXPECT_EQ(ex[1], cpp_rational(0));
  // E[Z^2] = Var(Y) g^2 / (1 - g^2) = (9/8)(1/3)
  EXPECT_EQ(ex[2], cpp_rational(3, 8));
  const auto fl = moments_recursive(-0.75, 1.5, 1.0 / 3.0, 0.5, 8);
  for (int k = 0; k <= 8; ++k) EXPECT_NEAR(fl.moments[k], static_cast<double>(ex[k]), 1e-14 * (1 + std::fabs(fl.moments[k])));
}

TEST(Properties, RecursionMatchesCumulantOracle) {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 50; ++i) {
    const double p = u(eng), mu = -3 * u(eng), nu = 3 * u(eng), g = (i % 2 ? 1 : -1) * u(eng) * 0.9;
    const auto rec = moments_recursive(mu, nu, p, g, 10).moments;
    const auto orc = moments_from_cumulants(mu, nu, p, g, 10);
    for (int k = 0; k <= 10; ++k)
      ASSERT_NEAR(rec[k], orc[k], 1e-10 * (1 + std::fabs(orc[k]))) << "i=" << i << " k=" << k;
  }
}

TEST(Properties, RecursionMatchesEnumeration) {
  std::mt19937_64 eng(6);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int i = 0; i < 20; ++i) {
    IIDTwoPointLaw l{-2 * u(eng), 2 * u(eng), u(eng), 2, 1};
    const double g = 0.2 + 0.4 * u(eng);
    const auto rec = moments_recursive(l.mu, l.nu, l.p, g, 6).moments;
    for (int k = 1; k <= 6; ++k) {
      const auto tm = signed_moment_truncated(l, g, k, 20);
      ASSERT_NEAR(tm.value, rec[k], tm.error_bound + 1e-12) << "i=" << i << " k=" << k;
    }
  }
}

TEST(Properties, RecursionMatchesMonteCarlo) {
  const auto s = FractalSpec::from_hurst(BaseFunction::skewed_tent(1, 3), 3, 1.0 / 3.0);
  const auto l = iid_params(3, 1);
  const auto rec = moments_recursive(l.mu, l.nu, l.p, s.gamma(), 4).moments;
  for (int k : {2, 3, 4}) {
    const auto r = mc_estimate(s, k, true, 0, 400000, 11);
    EXPECT_NEAR(r.estimate, rec[k], 5 * r.std_error) << k;
  }
}

TEST(Properties, OddMomentSignFollowsAsymmetry) {
  for (int b = 3; b <= 8; ++b)
    for (int ell = 1; ell < b; ++ell) {
      const auto l = iid_params(b, ell);
      for (double g : {0.2, 0.5, std::pow(b, -2.0 / 3.0), 0.8}) {
        const auto t = moments_recursive(l.mu, l.nu, l.p, g, 7).moments;
        for (int k : {3, 5, 7}) {
          const int s = odd_moment_sign(l.mu, l.nu, l.p, g, k);
          if (s == 0)
            EXPECT_NEAR(t[k], 0.0, 1e-12);
          else
            EXPECT_EQ(t[k] > 0 ? 1 : -1, s) << "b=" << b << " l=" << ell << " g=" << g << " k=" << k;
        }
      }
    }
  EXPECT_THROW(odd_moment_sign(-1, 2, 0.5, 0.5, 3), std::invalid_argument);  // not centered
  EXPECT_THROW(odd_moment_sign(-1, 1, 0.5, 0.5, 4), std::invalid_argument);
}

TEST(Properties, ThirdMomentClosedForm) {
  for (int b = 2; b <= 9; ++b)
    for (int ell = 1; ell < b; ++ell) {
      const auto l = iid_params(b, ell);
      const double g = std::pow(b, -2.0 / 3.0);
      const double rec = moments_recursive(l.mu, l.nu, l.p, g, 3).moments[3];
      EXPECT_NEAR(third_moment_closed_form(b, ell), rec, 1e-13 * (1 + std::fabs(rec))) << b << " " << ell;
    }
}

TEST(Truncated, Examples) {
  const auto tent2 = iid_params(2, 1);
  const double g2 = 1 / std::sqrt(2.0);
  const auto a = abs_moment_truncated(tent2, g2, 2.0, 24);
  EXPECT_NEAR(a.value, 1.0, a.error_bound + 1e-12);
  EXPECT_EQ(a.depth, 24);
  EXPECT_LT(a.error_bound, 1e-2);

  const auto sk = iid_params(3, 1);
  const double g3 = std::pow(3.0, -2.0 / 3.0);
  const auto s = signed_moment_truncated(sk, g3, 3, 20);
  EXPECT_NEAR(s.value, 27.0 / 256.0, s.error_bound);
  EXPECT_LT(s.error_bound, 1e-3);

  // depth 1: E|gamma Y| = gamma for Y = +-1
  EXPECT_NEAR(abs_moment_truncated(tent2, 0.6, 1.0, 1).value, 0.6, 1e-15);
}

TEST(Truncated, MarkovLawAgreesWithLongerEnumeration) {
  const auto law = markov_params(3);
  const double g = 0.6;
  const auto lo = abs_moment_truncated(law, g, 2.5, 10);
  const auto hi = abs_moment_truncated(law, g, 2.5, 16);
  EXPECT_LE(std::fabs(lo.value - hi.value), lo.error_bound + hi.error_bound);
  EXPECT_LT(hi.error_bound, lo.error_bound);
}

TEST(Truncated, Rejects) {
  const auto l = iid_params(2, 1);
  EXPECT_THROW(abs_moment_truncated(l, 1.0, 2.0, 5), std::invalid_argument);
  EXPECT_THROW(abs_moment_truncated(l, 0.5, 0.5, 5), std::invalid_argument);
  EXPECT_THROW(abs_moment_truncated(l, 0.5, 2.0, -1), std::invalid_argument);
  EXPECT_THROW(signed_moment_truncated(l, 0.5, 0, 5), std::invalid_argument);
  EXPECT_THROW(abs_moment_truncated(l, 0.5, 2.0, 40, 1000), budget_exceeded);
}

TEST(Truncated, DepthMeetsTarget) {
  const IncrementLaw l = iid_params(3, 1);
  const double g = std::pow(3.0, -2.0 / 3.0);
  const int n = enumeration_depth(l, g, 3.0, 1e-4, std::uint64_t{1} << 26);
  const auto tm = abs_moment_enumerated(l, g, 3.0, n);
  EXPECT_LE(tm.error_bound, 1e-4);
  EXPECT_GT(abs_moment_enumerated(l, g, 3.0, n - 1).error_bound, 1e-4);
  // a budget too small for the target caps the depth
  EXPECT_EQ(enumeration_depth(l, g, 3.0, 1e-12, 1024), 10);
}
