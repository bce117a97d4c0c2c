#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mimoee/asymptotics.hpp"
#include "mimoee/channel_mc.hpp"
#include "mimoee/search.hpp"

using namespace mimoee;

namespace {

std::vector<double> log_points(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return v;
}

// Divided second difference in p (the grid is not uniform).
double second_difference(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
  return (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
}

int second_difference_sign_changes(const std::vector<double>& x, const std::vector<double>& y) {
  int changes = 0;
  int last = 0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double d2 = second_difference(x, y, i);
    const double scale = (std::abs(y[i + 1]) + std::abs(y[i]) + std::abs(y[i - 1])) / (x[i + 1] - x[i - 1]);
    if (std::abs(d2) <= 1e-9 * scale) continue;
    const int s = d2 > 0 ? 1 : -1;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

int strict_local_maxima(const std::vector<double>& y) {
  int peaks = 0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] > y[i - 1] && y[i] > y[i + 1]) ++peaks;
  return peaks;
}

}  // namespace

TEST(QFunction, Examples) {
  EXPECT_EQ(q_function(0.0), 0.5);
  for (double x : {0.5, 1.0, 2.0}) EXPECT_NEAR(q_function(x) + q_function(-x), 1.0, 1e-15);
  EXPECT_NEAR(q_function(1.6449), 0.05, 1e-4);
  EXPECT_GT(q_function(30.0), 0.0);
}

TEST(RegimeA, Examples) {
  const auto p = make_params(2, 8, 0.1, 1.0, 1.0);
  // Power where n_t log2(1 + (n_r/n_t) rho p) = R.
  const double p0 = (std::pow(2.0, p.rate() / p.n_t()) - 1.0) * p.n_t() / (p.n_r() * p.rho());
  EXPECT_NEAR(goodput_regime_a(p0, p), 0.5 * p.rate(), 1e-12);
  const double at0 = goodput_regime_a(0.0, p);
  EXPECT_NEAR(at0, p.rate() * q_function(p.rate() / std::sqrt(0.25 * kLog2E)), 1e-15);
  EXPECT_LT(at0, 0.5 * p.rate());
  double prev = -1.0;
  for (double x : log_points(1e-5, 10.0, 1000)) {
    const double g = goodput_regime_a(x, p);
    EXPECT_GE(g, prev);
    EXPECT_LE(g, p.rate());
    prev = g;
  }
}

TEST(RegimeA, InflectionVanishesWithReceiveAntennas) {
  EXPECT_LT(inflection_regime_a(make_params(2, 1000000, 0.1, 1.0, 1.0)), 1e-6);
  EXPECT_GT(inflection_regime_a(make_params(2, 4, 0.1, 1.0, 1.0)), 0.0);
}

TEST(RegimeA, InflectionMatchesSecondDifference) {
  const auto p = make_params(2, 64, 0.1, 1.0, 1.0);
  const auto grid = log_points(1e-5, 1.0, 200);
  std::vector<double> y;
  for (double x : grid) y.push_back(goodput_regime_a(x, p));
  ASSERT_EQ(second_difference_sign_changes(grid, y), 1);
  std::size_t k = 1;
  while (k + 1 < y.size() && !(second_difference(grid, y, k) < 0)) ++k;
  const double step = grid[1] / grid[0];
  const double pt = inflection_regime_a(p);
  EXPECT_GT(pt, grid[k - 1] / step);
  EXPECT_LT(pt, grid[k + 1] * step);
}

TEST(RegimeB, Examples) {
  const auto p = make_params(4, 2, 0.1, 1.0, 1.0);
  EXPECT_NEAR(goodput_regime_b(inflection_regime_b(p), p), 0.5, 1e-12);
  const auto big = make_params(10000, 2, 0.1, 1.0, 1.0);
  const double pt = inflection_regime_b(big);
  EXPECT_GT(goodput_regime_b(3.0 * pt, big), 0.999);
  EXPECT_LT(goodput_regime_b(pt / 3.0, big), 1e-3);
  EXPECT_EQ(goodput_regime_b(0.0, big), 0.0);
}

TEST(RegimeB, Limits) {
  const auto fig = regime_b_limits(make_params(8, 2, sigma2_from_rho_db(10.0), 1.0, 1.0));
  EXPECT_NEAR(fig.p_star, 0.0414, 1e-4);
  EXPECT_NEAR(fig.gamma_star, 12.07, 1e-2);
  const auto unit = regime_b_limits(make_params(1, 1, 1.0, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(unit.p_star, 1.0);
  EXPECT_DOUBLE_EQ(unit.gamma_star, 0.5);
  EXPECT_DOUBLE_EQ(fig.gamma_star, 0.5 / fig.p_star);
}

TEST(RegimeC, GammaTermsAndLimits) {
  for (double beta : {0.5, 1.0, 2.0}) {
    const auto far = regime_c_terms(1e9, 10.0, beta);
    // At beta = 1 the gap closes only like 1/sqrt(snr).
    const double tol = beta == 1.0 ? 2.0 / std::sqrt(10.0 * 1e9) : 1e-6;
    EXPECT_NEAR(far.gamma, std::min(1.0, beta), tol);
    for (double p : {0.01, 0.1, 1.0}) {
      const auto t = regime_c_terms(p, 10.0, beta);
      if (t.gamma * t.gamma < beta) {
        EXPECT_GT(t.variance, 0.0);
      }
      EXPECT_GE(t.gamma, 0.0);
      EXPECT_LE(t.gamma, std::min(1.0, beta));
    }
  }
  EXPECT_THROW(regime_c_terms(0.0, 10.0, 1.0), ZeroPower);
  EXPECT_THROW(regime_c_terms(1.0, 10.0, 0.0), NonPositiveField);
}

TEST(RegimeC, MuIncreasingAndVanishingAtZero) {
  double prev = -1.0;
  for (double p : log_points(1e-6, 10.0, 400)) {
    const double mu = regime_c_terms(p, 10.0, 1.0).mu;
    EXPECT_GT(mu, prev);
    prev = mu;
  }
  EXPECT_LT(regime_c_terms(1e-9, 10.0, 1.0).mu, 1e-6);
  EXPECT_LT(regime_c_terms(1e-9, 10.0, 1.0, MuConvention::kVerbatim).mu, 1e-6);
  EXPECT_EQ(inflection_regime_c(make_params(2, 2, 0.1, 1.0, 1.0), 1.0), 0.0);
}

TEST(RegimeC, CorrectedMeanTracksMonteCarlo) {
  // 8x8 at rho = 10 dB: compare approximate and simulated goodput on a log grid.
  const auto p = make_params(8, 8, 0.1, 1.0, 1.0);
  const ChannelEnsemble ens(p, {2024, 20000, 0});
  const auto grid = log_points(1e-3, 1.0, 30);
  const auto mc = upa_gpr_curve_mc(ens, grid);
  double worst_fixed = 0.0, worst_verbatim = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double sim = mc[i].mean * grid[i];
    worst_fixed = std::max(worst_fixed, std::abs(goodput_regime_c(grid[i], p, 1.0) - sim));
    worst_verbatim = std::max(
        worst_verbatim,
        std::abs(goodput_regime_c(grid[i], p, 1.0, MuConvention::kVerbatim) - sim));
  }
  EXPECT_LT(worst_fixed, 0.1 * p.rate());
  EXPECT_GT(worst_verbatim, worst_fixed);
}

TEST(Goodput, BoundedMonotoneSigmoidal) {
  const auto pa = make_params(2, 32, 0.1, 1.0, 1.0);
  const auto pb = make_params(64, 2, 0.1, 1.0, 1.0);
  const auto grid = log_points(1e-5, 10.0, 300);
  std::vector<double> ya, yb, yc, ra, rb, rc;
  for (double x : grid) {
    ya.push_back(goodput_regime_a(x, pa));
    yb.push_back(goodput_regime_b(x, pb));
    yc.push_back(goodput_regime_c(x, pa, 1.0));
    ra.push_back(ya.back() / x);
    rb.push_back(yb.back() / x);
    rc.push_back(yc.back() / x);
  }
  for (const auto* y : {&ya, &yb, &yc}) {
    for (std::size_t i = 0; i < y->size(); ++i) {
      EXPECT_GE((*y)[i], 0.0);
      EXPECT_LE((*y)[i], 1.0);
      if (i) {
        EXPECT_GE((*y)[i], (*y)[i - 1]);
      }
    }
  }
  EXPECT_EQ(second_difference_sign_changes(grid, ya), 1);
  EXPECT_EQ(second_difference_sign_changes(grid, yb), 1);
  EXPECT_LE(strict_local_maxima(ra), 1);
  EXPECT_LE(strict_local_maxima(rb), 1);
  EXPECT_LE(strict_local_maxima(rc), 1);
}
