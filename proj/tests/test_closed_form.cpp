#include <gtest/gtest.h>

#include <cmath>

#include "mimoee/closed_form.hpp"

using namespace mimoee;

namespace {

// Erlang CDF by direct midpoint integration of the density x^{k-1} e^{-x}/(k-1)!.
double erlang_cdf_quadrature(int k, double x) {
  const int n = 200000;
  const double h = x / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * h;
    s += std::exp((k - 1) * std::log(t) - t - std::lgamma(k));
  }
  return s * h;
}

}  // namespace

TEST(ErlangCdf, Examples) {
  EXPECT_NEAR(erlang_cdf(1, 1.0), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(erlang_cdf(2, 1.0), 1.0 - 2.0 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(erlang_cdf(3, 0.0), 0.0);
  EXPECT_THROW(erlang_cdf(0, 1.0), NonPositiveField);
  EXPECT_THROW(erlang_cdf(2, -1.0), InvalidArgument);
}

TEST(ErlangCdf, AgreesWithQuadrature) {
  for (int k : {1, 2, 3, 5, 8})
    for (double x : {0.01, 0.3, 1.0, 2.5, 7.0})
      EXPECT_NEAR(erlang_cdf(k, x), erlang_cdf_quadrature(k, x), 1e-8) << k << " " << x;
}

TEST(ErlangCdf, SmallArgumentsKeepRelativeAccuracy) {
  // For x << 1, F_k(x) ~ x^k / k!.
  EXPECT_NEAR(erlang_cdf(4, 1e-5) / (std::pow(1e-5, 4) / 24.0), 1.0, 1e-4);
  EXPECT_GT(erlang_cdf(16, 1e-3), 0.0);
}

TEST(ErlangCdf, MonotoneInXAndDecreasingInShape) {
  for (int k = 1; k <= 12; ++k) {
    double prev = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = 0.01 * i;
      const double f = erlang_cdf(k, x);
      EXPECT_GE(f, prev);
      EXPECT_LE(erlang_cdf(k + 1, x), f + 1e-16);
      prev = f;
    }
  }
}

TEST(ErlangSurvival, LogSpaceAtLargeArguments) {
  EXPECT_EQ(erlang_survival(2, 1e6), 0.0);
  EXPECT_NEAR(log_erlang_survival(2, 800.0), -800.0 + std::log(801.0), 1e-9);
  EXPECT_NEAR(log_erlang_survival(3, 2.0), std::log(std::exp(-2.0) * 5.0), 1e-14);
}

TEST(SisoGpr, Examples) {
  const auto p = make_params(1, 1, 0.1, 1.0, 1.0);
  EXPECT_NEAR(siso_gpr(p.c(), p), std::exp(-1.0) / p.c(), 1e-14);
  EXPECT_NEAR(siso_gpr(0.1, p), 3.6787944117144233, 1e-12);
  EXPECT_LT(siso_gpr(1e6 * p.c(), p), siso_gpr(p.c(), p));
  EXPECT_THROW(siso_gpr(0.0, p), ZeroPower);
}

TEST(SisoGpr, DerivativeChangesSignAtC) {
  const auto p = make_params(1, 1, 0.3, 2.0, 1.0);
  const double c = p.c();
  const double h = 1e-6 * c;
  EXPECT_GT(siso_gpr(c - h, p), siso_gpr(c - 2 * h, p));
  EXPECT_GT(siso_gpr(c + h, p), siso_gpr(c + 2 * h, p));
}

TEST(MisoUpaGpr, Examples) {
  const auto siso = make_params(1, 1, 0.2, 2.0, 1.0);
  for (double pw : {0.01, 0.3, 1.0, 5.0})
    EXPECT_NEAR(miso_upa_gpr(pw, siso), siso_gpr(pw, siso), 1e-14 * siso_gpr(pw, siso));
  const auto two = make_params(2, 1, 0.1, 1.0, 1.0);
  const double pw = two.d();
  EXPECT_NEAR(miso_upa_gpr(pw, two), 2.0 * std::exp(-1.0) / pw, 1e-14);
  EXPECT_THROW(miso_upa_gpr(0.1, make_params(2, 2, 0.1, 1.0, 1.0)), NotMiso);
  EXPECT_THROW(miso_upa_gpr(0.0, two), ZeroPower);
}

TEST(MisoUpaGpr, TwoFormulaPathsAgree) {
  for (int nt : {1, 2, 3, 4, 8, 16}) {
    const auto p = make_params(nt, 1, 0.1, 3.0, 1.0);
    for (double pw : {0.05, 0.2, 0.7, 2.0, 10.0}) {
      const double a = miso_upa_gpr(pw, p);
      const double y = p.d() / pw;
      const double b = p.rate() * erlang_survival(nt, y) / pw;
      EXPECT_NEAR(a, b, 1e-12 * a) << nt << " " << pw;
      // 1 - cdf cancels once the survival is small; only compare where it is not.
      if (erlang_survival(nt, y) > 1e-3) {
        const double c = p.rate() * (1.0 - erlang_cdf(nt, y)) / pw;
        EXPECT_NEAR(a, c, 1e-11 * a) << nt << " " << pw;
      }
    }
  }
}

TEST(MisoUpaGpr, MatchesMonteCarlo) {
  const auto p = make_params(4, 1, 0.1, 3.0, 1.0);
  const auto mc = gpr_mc(PowerAllocation::uniform(4, 0.5), p, {31, 100000, 0});
  EXPECT_NEAR(miso_upa_gpr(0.5, p), mc.mean, 4.0 * mc.std_error);
}

TEST(SimoGpr, Examples) {
  const auto siso = make_params(1, 1, 0.2, 1.0, 1.0);
  EXPECT_NEAR(simo_gpr(0.3, siso), siso_gpr(0.3, siso), 1e-15);
  const auto two = make_params(1, 2, 0.1, 1.0, 1.0);
  const double pw = two.c();
  EXPECT_NEAR(simo_gpr(pw, two), 2.0 * std::exp(-1.0) / pw, 1e-13);
  EXPECT_THROW(simo_gpr(0.1, make_params(2, 2, 0.1, 1.0, 1.0)), NotSimo);
}

TEST(SimoGpr, MatchesMonteCarlo) {
  const auto p = make_params(1, 4, 0.1, 1.0, 1.0);
  const auto mc = gpr_mc(PowerAllocation({0.2}), p, {32, 100000, 0});
  EXPECT_NEAR(simo_gpr(0.2, p), mc.mean, 4.0 * mc.std_error);
}

TEST(MimoSmallP, SeriesBehaviour) {
  const auto siso = make_params(1, 1, 0.1, 1.0, 1.0);
  EXPECT_NEAR(mimo_upa_gpr_smallp(0.2, siso), siso_gpr(0.2, siso), 1e-14);
  const auto p = make_params(2, 2, 0.1, 1.0, 1.0);
  const double a = mimo_upa_gpr_smallp(p.d() / 50, p);
  const double b = mimo_upa_gpr_smallp(p.d() / 100, p);
  EXPECT_LT(b, a);
  EXPECT_LT(a, 1e-10);
}

// det(I + xA) >= 1 + x Tr A, so the trace approximation undercounts successes.
TEST(MimoSmallP, LowerBoundsMonteCarlo) {
  const auto p = make_params(2, 2, 0.1, 1.0, 1.0);
  const ChannelEnsemble ens(p, {77, 1000000, 0});
  for (double pw : {p.d() / 20, p.d() / 8, p.d() / 2}) {
    const std::vector<double> powers{pw};
    const auto mc = upa_gpr_curve_mc(ens, powers)[0];
    EXPECT_LE(mimo_upa_gpr_smallp(pw, p), mc.mean + 4.0 * mc.std_error) << pw;
  }
}

// The dropped determinant term scales with 2^R - 1; at a small rate it is negligible.
TEST(MimoSmallP, CloseToMonteCarloAtSmallRate) {
  const auto p = make_params(2, 2, 0.1, 0.05, 1.0);
  const double pw = p.d() / 4;
  const ChannelEnsemble ens(p, {77, 1000000, 0});
  const std::vector<double> powers{pw};
  const auto mc = upa_gpr_curve_mc(ens, powers)[0];
  EXPECT_NEAR(mimo_upa_gpr_smallp(pw, p) / mc.mean, 1.0, 0.10);
}

TEST(MisoSuccess, HypoexponentialMatchesOracles) {
  const auto p = make_params(3, 1, 0.2, 1.0, 1.0);
  const double c = p.c();
  // Two distinct weights a, b: Pr[a X + b Y > c] = (a e^{-c/a} - b e^{-c/b}) / (a - b).
  const double a = 0.4, b = 0.1;
  const double oracle = (a * std::exp(-c / a) - b * std::exp(-c / b)) / (a - b);
  EXPECT_NEAR(miso_success_probability(PowerAllocation({a, b, 0.0}), p), oracle, 1e-14);
  // Equal weights collapse to the Erlang tail.
  EXPECT_NEAR(miso_success_probability(PowerAllocation::uniform(3, 0.6), p),
              erlang_survival(3, 3.0 * c / 0.6), 1e-14);
  EXPECT_NEAR(miso_success_probability(PowerAllocation({0.3, 0.0, 0.0}), p),
              std::exp(-c / 0.3), 1e-15);
}

TEST(MisoSuccess, RepeatedPoleAgreesWithMonteCarlo) {
  const auto p = make_params(3, 1, 0.2, 1.0, 1.0);
  const PowerAllocation a({0.3, 0.3, 0.1});
  const auto mc = outage_probability_mc(a, p, {55, 200000, 0});
  EXPECT_NEAR(miso_success_probability(a, p), 1.0 - mc.mean, 4.0 * mc.std_error);
}

TEST(MisoSuccess, ContinuousAcrossNearlyEqualWeights) {
  const auto p = make_params(2, 1, 0.2, 1.0, 1.0);
  const double eq = miso_success_probability(PowerAllocation({0.2, 0.2}), p);
  for (double eps : {1e-3, 1e-5, 1e-6, 1e-8})
    EXPECT_NEAR(miso_success_probability(PowerAllocation({0.2 + eps, 0.2 - eps}), p), eq, 1e-5);
}

TEST(StaticEfficiency, Examples) {
  const auto siso = make_params(1, 1, 1.0, 1.0, 1.0);
  Eigen::MatrixXcd one(1, 1);
  one(0, 0) = 1.0;
  const ChannelSample h{one};
  EXPECT_DOUBLE_EQ(static_efficiency(h, PowerAllocation({1.0}), siso), 1.0);
  EXPECT_LT(static_efficiency(h, PowerAllocation({2.0}), siso),
            static_efficiency(h, PowerAllocation({1.0}), siso));
  EXPECT_NEAR(static_efficiency_sup(h, siso), 1.0 / std::log(2.0), 1e-15);
  EXPECT_THROW(static_efficiency(h, PowerAllocation({0.0}), siso), ZeroPower);

  const auto two = make_params(2, 2, 1.0, 1.0, 1.0);
  const ChannelSample eye{Eigen::MatrixXcd::Identity(2, 2)};
  EXPECT_NEAR(static_efficiency_sup(eye, two), 1.0 / std::log(2.0), 1e-15);
}

TEST(StaticEfficiency, SupremumIsSmallPowerLimit) {
  const auto p = make_params(3, 2, 0.5, 1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const auto h = sample_channel(p, 3, static_cast<std::uint64_t>(t));
    const double g = static_efficiency(h, PowerAllocation::uniform(3, 1e-6), p);
    EXPECT_NEAR(g / static_efficiency_sup(h, p), 1.0, 1e-3);
  }
}

TEST(FastEfficiency, Examples) {
  EXPECT_NEAR(fast_efficiency_sup(make_params(1, 1, 1.0, 1.0, 1.0)), 1.0 / std::log(2.0), 1e-15);
  EXPECT_NEAR(fast_efficiency_sup(make_params(2, 4, 0.5, 1.0, 1.0)), 11.541560327111707, 1e-12);
  const auto p = make_params(2, 4, 0.5, 1.0, 1.0);
  double acc = 0.0;
  for (int t = 0; t < 10000; ++t)
    acc += static_efficiency_sup(sample_channel(p, 6, static_cast<std::uint64_t>(t)), p);
  EXPECT_NEAR(acc / 10000 / fast_efficiency_sup(p), 1.0, 0.02);
}
