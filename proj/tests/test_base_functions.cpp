#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fracvar/base_function.hpp"
#include "fracvar/parse.hpp"

using namespace fracvar;

namespace {

std::vector<double> uniform_points(int count, double lo, double hi, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> pts(count);
  for (auto& t : pts) t = u(eng);
  return pts;
}

}  // namespace

TEST(EvalPhi, TentValues) {
  const auto tent = BaseFunction::tent();
  EXPECT_EQ(eval_phi(tent, 0.25), 0.25);
  EXPECT_EQ(eval_phi(tent, 1.75), 0.25);
  EXPECT_EQ(eval_phi(tent, 0.5), 0.5);
  EXPECT_EQ(eval_phi(tent, -0.25), 0.25);
}

TEST(EvalPhi, SkewedTentPeak) {
  const auto s = BaseFunction::skewed_tent(1, 3);
  EXPECT_NEAR(eval_phi(s, 1.0 / 3.0), 0.5, 1e-15);
  EXPECT_NEAR(eval_phi(s, 1.0 / 6.0), 0.25, 1e-15);
  EXPECT_NEAR(eval_phi(s, 2.0 / 3.0), 0.25, 1e-15);
}

TEST(EvalPhi, DegenerateVanishesAtHalf) {
  const auto d = BaseFunction::degenerate(BaseFunction::sine(1.0), 0.7, 2);
  EXPECT_NEAR(eval_phi(d, 0.5), 0.0, 1e-15);
  const double t = 0.1;
  EXPECT_NEAR(eval_phi(d, t), std::sin(2 * std::numbers::pi * t) - 0.7 * std::sin(4 * std::numbers::pi * t), 1e-14);
}

TEST(EvalPhi, SineQuarter) { EXPECT_DOUBLE_EQ(eval_phi(BaseFunction::sine(0.5), 0.25), 0.5); }

TEST(BaseFunction, SkewedTentRangeChecked) {
  EXPECT_THROW(BaseFunction::skewed_tent(0, 3), std::invalid_argument);
  EXPECT_THROW(BaseFunction::skewed_tent(3, 3), std::invalid_argument);
}

TEST(BaseFunction, PiecewiseLinearNeedsUnitInterval) {
  EXPECT_THROW(BaseFunction::piecewise_linear({{0.1, 0.0}, {1.0, 0.0}}), std::invalid_argument);
  EXPECT_THROW(BaseFunction::piecewise_linear({{0.0, 0.0}, {0.5, 0.0}, {0.5, 1.0}, {1.0, 0.0}}),
               std::invalid_argument);
}

TEST(BaseFunction, AnalyticConstants) {
  EXPECT_EQ(BaseFunction::tent().lipschitz_constant(), 1.0);
  EXPECT_EQ(BaseFunction::tent().sup_norm(), 0.5);
  EXPECT_DOUBLE_EQ(BaseFunction::skewed_tent(1, 3).lipschitz_constant(), 1.5);
  EXPECT_DOUBLE_EQ(BaseFunction::skewed_tent(5, 6).lipschitz_constant(), 3.0);
  EXPECT_DOUBLE_EQ(BaseFunction::sine(0.5).lipschitz_constant(), std::numbers::pi);
  EXPECT_DOUBLE_EQ(BaseFunction::sine(0.5).sup_norm(), 0.5);
  const auto d = BaseFunction::degenerate(BaseFunction::sine(1.0), 0.7, 2);
  EXPECT_DOUBLE_EQ(d.lipschitz_constant(), 2 * std::numbers::pi * 2.4);
  EXPECT_DOUBLE_EQ(d.sup_norm(), 1.7);
  EXPECT_DOUBLE_EQ(BaseFunction::scaled_tent(5).lipschitz_constant(), 5.0);
  EXPECT_DOUBLE_EQ(BaseFunction::scaled_tent(5).sup_norm(), 2.5);
}

TEST(CheckAdmissible, BuiltInKinds) {
  for (const auto& phi : {BaseFunction::tent(), BaseFunction::skewed_tent(1, 3), BaseFunction::sine(0.5),
                          BaseFunction::scaled_tent(5)}) {
    const auto r = check_admissible(phi, 1000, 1e-12);
    EXPECT_TRUE(r.periodic) << phi.label();
    EXPECT_TRUE(r.vanishes_on_integers) << phi.label();
    EXPECT_TRUE(r.lipschitz_ok) << phi.label() << " ratio " << r.max_lipschitz_ratio;
  }
  EXPECT_DOUBLE_EQ(BaseFunction::sine(0.5).lipschitz_constant(), std::numbers::pi);
}

TEST(CheckAdmissible, NonVanishingEndpointReported) {
  const auto phi = read_breakpoints_csv(std::string(FRACVAR_TEST_DATA) + "/open_end.csv");
  const auto r = check_admissible(BaseFunction::piecewise_linear(phi), 1000, 1e-12);
  EXPECT_FALSE(r.vanishes_on_integers);
}

TEST(CheckAdmissible, ArgumentChecks) {
  EXPECT_THROW(check_admissible(BaseFunction::tent(), 1, 1e-12), std::invalid_argument);
  EXPECT_THROW(check_admissible(BaseFunction::tent(), 10, 0.0), std::invalid_argument);
}

TEST(SufficientCondition, Examples) {
  const auto tent = check_sufficient_condition(BaseFunction::tent(), 2, 20);
  EXPECT_TRUE(tent.holds);
  EXPECT_EQ(tent.witness_k, 1);
  const auto sine = check_sufficient_condition(BaseFunction::sine(0.5), 3, 20);
  EXPECT_TRUE(sine.holds);
  EXPECT_EQ(sine.witness_k, 1);
  const auto neg = BaseFunction::piecewise_linear({{0.0, 0.0}, {0.5, -0.5}, {1.0, 0.0}}, "-tent");
  EXPECT_FALSE(check_sufficient_condition(neg, 2, 20).holds);
}

TEST(SufficientCondition, ZeroAtEveryWitnessFails) {
  const auto phi = BaseFunction::piecewise_linear({{0.0, 0.0}, {0.75, 0.25}, {1.0, 0.0}});
  EXPECT_TRUE(check_sufficient_condition(phi, 2, 20).holds);  // phi(1/2) = 1/6
  // vanishes at every 2^-k without vanishing identically
  const auto z = BaseFunction::piecewise_linear({{0.0, 0.0}, {0.5, 0.0}, {0.75, 0.1}, {1.0, 0.0}});
  EXPECT_FALSE(check_sufficient_condition(z, 2, 20).holds);
}

TEST(Properties, Periodicity) {
  const auto pts = uniform_points(10000, 0.0, 3.0, 1);
  for (const auto& phi : {BaseFunction::tent(), BaseFunction::skewed_tent(2, 5), BaseFunction::scaled_tent(5)})
    for (double t : pts) ASSERT_LE(std::fabs(phi(t + 1.0) - phi(t)), 1e-12) << phi.label() << " t=" << t;
  const auto sine = BaseFunction::sine(0.5);
  for (double t : pts) ASSERT_LE(std::fabs(sine(t + 1.0) - sine(t)), 1e-9);
}

TEST(Properties, IntegerZeros) {
  for (int k = -2; k <= 3; ++k) {
    EXPECT_EQ(BaseFunction::tent()(k), 0.0);
    EXPECT_EQ(BaseFunction::skewed_tent(1, 3)(k), 0.0);
    EXPECT_LE(std::fabs(BaseFunction::sine(0.5)(k)), 1e-12);
  }
}

TEST(Properties, SkewedTentMatchesTentForEvenB) {
  const auto pts = uniform_points(1000, -1.0, 2.0, 2);
  for (int b : {2, 4, 6, 8}) {
    const auto s = BaseFunction::skewed_tent(b / 2, b);
    for (double t : pts) ASSERT_LE(std::fabs(s(t) - BaseFunction::tent()(t)), 1e-12);
  }
}

TEST(Properties, SampledLipschitzQuotients) {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (const auto& phi : {BaseFunction::tent(), BaseFunction::skewed_tent(1, 4), BaseFunction::sine(0.5),
                          BaseFunction::degenerate(BaseFunction::sine(1.0), 0.7, 2)}) {
    const double lip = phi.lipschitz_constant();
    for (int i = 0; i < 5000; ++i) {
      const double s = u(eng), t = u(eng);
      if (s == t) continue;
      ASSERT_LE(std::fabs(phi(s) - phi(t)) / std::fabs(s - t), lip * (1 + 1e-9)) << phi.label();
    }
  }
}

TEST(MeanSlope, MatchesDifferenceQuotient) {
  const auto pts = uniform_points(500, 0.0, 1.0, 4);
  for (const auto& phi : {BaseFunction::tent(), BaseFunction::skewed_tent(1, 3), BaseFunction::sine(0.5),
                          BaseFunction::degenerate(BaseFunction::sine(1.0), 0.7, 2)})
    for (double x : pts)
      for (double h : {0.25, 1.0 / 3.0, 1e-3}) {
        const double q = (phi(x + h) - phi(x)) / h;
        ASSERT_NEAR(phi.mean_slope(x, h), q, 1e-12 / h + 1e-9)
            << phi.label() << " x=" << x << " h=" << h;
      }
}

TEST(MeanSlope, ExactOnBadicCellsOfTent) {
  const auto tent = BaseFunction::tent();
  for (int m = 1; m <= 8; ++m) {
    const double h = std::pow(3.0, -m);
    for (int k = 0; k < std::pow(3, m); ++k) {
      const double y = tent.mean_slope(k * h, h);
      ASSERT_NEAR(y, std::nearbyint(y), 1e-12);
    }
  }
}
