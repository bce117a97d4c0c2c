#include <gtest/gtest.h>

#include <cmath>

#include "mimoee/solvers.hpp"

using namespace mimoee;

namespace {

// Independent root finder for nu_n: plain Newton on phi_n from y = n.
double nu_newton(int n) {
  double y = static_cast<double>(n);
  for (int it = 0; it < 200; ++it) {
    double f = 0.0, df = 0.0;
    double fact = 1.0;
    for (int i = 0; i < n; ++i) {
      if (i > 0) fact *= i;
      f -= std::pow(y, i) / fact;
      if (i > 0) df -= i * std::pow(y, i - 1) / fact;
    }
    const double fn1 = fact;  // (n-1)!
    f += std::pow(y, n) / fn1;
    df += n * std::pow(y, n - 1) / fn1;
    const double step = f / df;
    y -= step;
    if (std::abs(step) < 1e-15 * y) break;
  }
  return y;
}

}  // namespace

TEST(Bisect, FindsRootAndRejectsBadBracket) {
  const double r = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0);
  EXPECT_NEAR(r, std::sqrt(2.0), 4e-16);
  EXPECT_EQ(bisect([](double x) { return x - 1.0; }, 1.0, 3.0), 1.0);
  EXPECT_THROW(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0), BracketFailure);
}

TEST(Nu, Examples) {
  EXPECT_EQ(solve_nu(1), 1.0);
  EXPECT_NEAR(solve_nu(2), (1.0 + std::sqrt(5.0)) / 2.0, 1e-15);
  EXPECT_NEAR(solve_nu(4), 2.945, 0.01);
  EXPECT_THROW(solve_nu(0), NonPositiveField);
}

TEST(Nu, ResidualAndSignChange) {
  for (int n = 1; n <= 16; ++n) {
    const double nu = solve_nu(n);
    EXPECT_LT(std::abs(phi(n, nu)), 1e-10) << n;
    if (n > 1) {
      EXPECT_LT(phi(n, nu * (1 - 1e-6)), 0.0);
      EXPECT_GT(phi(n, nu * (1 + 1e-6)), 0.0);
    }
  }
}

TEST(Nu, AgreesWithNewtonOracle) {
  for (int n = 2; n <= 12; ++n) EXPECT_NEAR(solve_nu(n), nu_newton(n), 1e-10) << n;
}

TEST(Thresholds, FirstRootSolvesTranscendental) {
  const double c1 = solve_c_threshold(1);
  EXPECT_NEAR(c1, 1.25643, 1e-5);
  EXPECT_LT(std::abs(std::exp(c1) - 1.0 - 2.0 * c1), 1e-10);
}

TEST(Thresholds, DecreasingAndAboveOne) {
  const auto t = solve_c_thresholds(8);
  ASSERT_EQ(t.c_values.size(), 7u);
  for (std::size_t i = 0; i < t.c_values.size(); ++i) {
    EXPECT_GT(t.c_values[i], 1.0);
    if (i > 0) {
      EXPECT_LT(t.c_values[i], t.c_values[i - 1]);
    }
  }
  EXPECT_THROW(solve_c_thresholds(1), InvalidArgument);
  EXPECT_TRUE(std::isinf(t.at(0)));
  EXPECT_EQ(t.at(8), 0.0);
}

TEST(Thresholds, SingleSignChangeOnScan) {
  for (int l = 1; l <= 3; ++l) {
    int changes = 0;
    double prev = detail::threshold_equation(l, 1e-3);
    EXPECT_LT(prev, 0.0);
    for (int i = 1; i <= 10000; ++i) {
      const double x = 1e-3 + i * (10.0 - 1e-3) / 10000;
      const double v = detail::threshold_equation(l, x);
      if ((v > 0.0) != (prev > 0.0)) ++changes;
      prev = v;
    }
    EXPECT_EQ(changes, 1) << l;
    EXPECT_GT(prev, 0.0);
  }
}

TEST(Thresholds, EqualScaledErlangCdfsAtRoot) {
  for (int l = 1; l <= 5; ++l) {
    const double x = solve_c_threshold(l);
    EXPECT_NEAR(erlang_cdf(l + 1, (l + 1) * x), erlang_cdf(l, l * x), 1e-12);
  }
}

TEST(MisoOptimal, Examples) {
  const auto p = make_params(4, 1, 0.1, 3.0, 0.3);
  const auto s = miso_optimal_precoder(p);
  EXPECT_EQ(s.active_antennas, 1);
  EXPECT_DOUBLE_EQ(s.per_antenna_power, 0.3);
  EXPECT_TRUE(s.saturated);

  const auto big = miso_optimal_precoder(p.with_p_max(10.0));
  EXPECT_EQ(big.active_antennas, 4);
  EXPECT_NEAR(big.per_antenna_power, 0.238, 0.002);
  EXPECT_NEAR(big.per_antenna_power, 0.7 / solve_nu(4), 1e-14);
  EXPECT_FALSE(big.saturated);

  const auto siso = make_params(1, 1, 0.1, 1.0, 1.0);
  EXPECT_NEAR(miso_optimal_precoder(siso).per_antenna_power, 0.1, 1e-15);
  EXPECT_THROW(miso_optimal_precoder(make_params(2, 2, 0.1, 1.0, 1.0)), NotMiso);
}

TEST(MisoOptimal, IntervalsTileTheBudgetAxis) {
  const auto base = make_params(4, 1, 0.1, 3.0, 1.0);
  const auto& t = cached_thresholds(4);
  const double c = base.c();
  for (int l = 1; l < 4; ++l) {
    EXPECT_EQ(t.upper_power(l, c), t.lower_power(l + 1, c));
    const double edge = t.upper_power(l, c);
    EXPECT_EQ(miso_optimal_precoder(base.with_p_max(edge * (1 - 1e-9))).active_antennas, l);
    // Boundary belongs to the next interval.
    EXPECT_EQ(miso_optimal_precoder(base.with_p_max(edge)).active_antennas, l + 1);
  }
  EXPECT_EQ(t.lower_power(1, c), 0.0);
  for (int i = 1; i <= 400; ++i) {
    const auto s = miso_optimal_precoder(base.with_p_max(0.005 * i));
    EXPECT_LE(s.total_power(), 0.005 * i * (1 + 1e-15));
  }
}

TEST(MisoOptimal, GprContinuousAcrossThresholds) {
  const auto base = make_params(4, 1, 0.1, 3.0, 1.0);
  const auto& t = cached_thresholds(4);
  for (int l = 1; l < 4; ++l) {
    const double edge = t.upper_power(l, base.c());
    const double below = miso_optimal_gpr(base.with_p_max(edge * (1 - 1e-12)));
    const double above = miso_optimal_gpr(base.with_p_max(edge));
    EXPECT_NEAR(below / above, 1.0, 1e-6) << l;
  }
}

TEST(MisoOptimal, BeatsEveryUniformSubset) {
  const auto base = make_params(4, 1, 0.1, 3.0, 1.0);
  for (double b : {0.2, 0.5, 0.58, 0.62, 0.7, 1.0, 3.0}) {
    const auto p = base.with_p_max(b);
    const double best = miso_optimal_gpr(p);
    for (int l = 1; l <= 4; ++l)
      for (double frac : {0.25, 0.5, 0.75, 1.0})
        EXPECT_GE(best * (1 + 1e-12), miso_gpr(PowerAllocation::uniform_subset(4, l, frac * b), p));
  }
}

TEST(OptimalPowers, Examples) {
  EXPECT_NEAR(siso_optimal_power(make_params(1, 1, 0.1, 1.0, 1.0)), 0.1, 1e-15);
  EXPECT_EQ(siso_optimal_power(make_params(1, 1, 0.1, 1.0, 0.05)), 0.05);
  const auto two = make_params(2, 1, 0.1, 1.0, 1.0);
  const double ps = miso_upa_optimal_power(two);
  EXPECT_NEAR(ps, 0.2 / 1.6180339887498949, 1e-14);
  EXPECT_LT(miso_upa_gpr(ps + 1e-4, two), miso_upa_gpr(ps, two));
  EXPECT_LT(miso_upa_gpr(ps - 1e-4, two), miso_upa_gpr(ps, two));
  EXPECT_NEAR(miso_upa_optimal_power(make_params(1, 1, 0.1, 1.0, 1.0)), 0.1, 1e-15);
  const auto simo = make_params(1, 3, 0.1, 1.0, 1.0);
  EXPECT_NEAR(simo_optimal_power(simo), simo.c() / solve_nu(3), 1e-15);
  EXPECT_THROW(simo_optimal_power(two), NotSimo);
}

TEST(OptimalPowers, SisoGradientVanishes) {
  const auto p = make_params(1, 1, 0.1, 1.0, 1.0);
  const double ps = siso_optimal_power(p);
  const double h = 1e-5 * ps;
  const double grad = (siso_gpr(ps + h, p) - siso_gpr(ps - h, p)) / (2 * h);
  EXPECT_LT(std::abs(grad) * ps / siso_gpr(ps, p), 1e-6);
}
