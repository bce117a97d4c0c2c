#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mimoee/channel_mc.hpp"
#include "mimoee/core.hpp"

namespace mimoee {

namespace detail {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr double kLogSpaceThreshold = 700.0;

inline void check_shape(int k) {
  if (k < 1) throw NonPositiveField("shape");
}

}  // namespace detail

/// log of the Erlang(k, 1) survival function, log(e^-x sum_{j<k} x^j / j!).
inline double log_erlang_survival(int k, double x) {
  detail::check_shape(k);
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
  // log-sum-exp over log terms j log x - log j!.
  const double lx = std::log(x);
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    logs[static_cast<std::size_t>(j)] = j * lx - std::lgamma(j + 1.0);
    top = std::max(top, logs[static_cast<std::size_t>(j)]);
  }
  detail::CompensatedSum s;
  for (double l : logs) s.add(std::exp(l - top));
  return -x + top + std::log(s.value());
}

/// Pr[X > x] for X ~ Erlang(k, 1): e^-x sum_{j=0}^{k-1} x^j / j!.
inline double erlang_survival(int k, double x) {
  detail::check_shape(k);
  if (x <= 0.0) return 1.0;
  if (x > detail::kLogSpaceThreshold) return std::exp(log_erlang_survival(k, x));
  detail::CompensatedSum s;
  double term = 1.0;
  for (int j = 0; j < k; ++j) {
    if (j > 0) term *= x / j;
    s.add(term);
  }
  return std::exp(-x) * s.value();
}

/// Pr[X <= x] for X ~ Erlang(k, 1) (sum of k unit exponentials).
inline double erlang_cdf(int k, double x) {
  detail::check_shape(k);
  if (x < 0.0) throw InvalidArgument("erlang_cdf: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < k) {
    // Lower tail series e^-x sum_{j>=k} x^j / j! avoids 1 - S cancellation.
    double term = std::exp(k * std::log(x) - x - std::lgamma(k + 1.0));
    detail::CompensatedSum s;
    for (int j = k; j < k + 2000; ++j) {
      s.add(term);
      term *= x / (j + 1);
      if (term < 1e-18 * s.value()) break;
    }
    return std::min(1.0, s.value());
  }
  return 1.0 - erlang_survival(k, x);
}

// ---------------------------------------------------------------------------
// Slow-fading goodput-to-power ratios.

inline double siso_gpr(double p, const SystemParams& params) {
  if (!(p > 0.0)) throw ZeroPower();
  return params.rate() * std::exp(-params.c() / p) / p;
}

/// R e^{-d/p} sum_{i<n_t} d^i / (i! p^{i+1}) for a single-antenna receiver
/// with UPA over n_t antennas.
inline double miso_upa_gpr(double p, const SystemParams& params) {
  if (params.n_r() != 1) throw NotMiso();
  if (!(p > 0.0)) throw ZeroPower();
  const double y = params.d() / p;
  if (y > detail::kLogSpaceThreshold)
    return params.rate() * std::exp(log_erlang_survival(params.n_t(), y) - std::log(p));
  detail::CompensatedSum s;
  double ratio_pow = 1.0;  // (d/p)^i / i!
  for (int i = 0; i < params.n_t(); ++i) {
    if (i > 0) ratio_pow *= y / i;
    s.add(ratio_pow / p);
  }
  return params.rate() * std::exp(-y) * s.value();
}

/// Single transmit antenna, n_r receive antennas: ||h||^2 ~ Erlang(n_r).
inline double simo_gpr(double p, const SystemParams& params) {
  if (params.n_t() != 1) throw NotSimo();
  if (!(p > 0.0)) throw ZeroPower();
  return params.rate() * erlang_survival(params.n_r(), params.c() / p) / p;
}

/// Low-power approximation of Gamma_UPA for general MIMO, from
/// |I + rho p/n_t HH^H| ~ 1 + rho p/n_t Tr(HH^H) with Tr(HH^H) ~ Erlang(n_r n_t).
/// Only meaningful as p -> 0.
inline double mimo_upa_gpr_smallp(double p, const SystemParams& params) {
  if (!(p > 0.0)) throw ZeroPower();
  return params.rate() * erlang_survival(params.n_r() * params.n_t(), params.d() / p) / p;
}

/// Success probability when all power goes to one antenna: reduces to the
/// SIMO channel, ||h_1||^2 ~ Erlang(n_r).
inline double beamforming_success_probability(double total, const SystemParams& params) {
  if (total <= 0.0) return 0.0;
  return erlang_survival(params.n_r(), params.c() / total);
}

/// Pr[log2(1 + rho sum p_i |h_i|^2) >= R] for a MISO channel and arbitrary
/// diagonal allocation: the tail at c of a weighted sum of unit exponentials.
///
/// Weights within 1e-7 relative are merged into one Gamma group; the tail is
/// assembled from the partial-fraction expansion of the Laplace transform
/// prod_k (lambda_k / (s + lambda_k))^{m_k}, lambda_k = 1 / p_k.
inline double miso_success_probability(const PowerAllocation& alloc, const SystemParams& params) {
  if (params.n_r() != 1) throw NotMiso();
  if (alloc.size() != static_cast<std::size_t>(params.n_t()))
    throw DimensionMismatch("miso_success_probability: allocation length != n_t");
  const double total = alloc.total();
  if (total <= 0.0) return 0.0;

  std::vector<double> w;
  for (double v : alloc.powers())
    if (v > kStructuralTol * total) w.push_back(v);
  std::sort(w.begin(), w.end());

  struct Group {
    double lambda;
    int mult;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < w.size();) {
    std::size_t j = i;
    double acc = 0.0;
    while (j < w.size() && w[j] - w[i] <= 1e-7 * w[i]) acc += w[j++];
    groups.push_back({static_cast<double>(j - i) / acc, static_cast<int>(j - i)});
    i = j;
  }

  const double c = params.c();
  if (groups.size() == 1) return erlang_survival(groups[0].mult, groups[0].lambda * c);

  detail::CompensatedSum tail;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const double s0 = -groups[k].lambda;
    const int m = groups[k].mult;
    // Derivatives of log G at s0: hd[r] = h^{(r)}(s0).
    std::vector<double> hd(static_cast<std::size_t>(m), 0.0);
    for (int r = 0; r < m; ++r) {
      double acc = 0.0;
      for (std::size_t i = 0; i < groups.size(); ++i) {
        if (i == k) continue;
        const double base = s0 + groups[i].lambda;
        acc += groups[i].mult * std::pow(-1.0, r) * std::tgamma(r + 1.0) / std::pow(base, r + 1);
      }
      hd[static_cast<std::size_t>(r)] = -acc;
    }
    // G^{(n)}(s0) via G' = G h.
    std::vector<double> gd(static_cast<std::size_t>(m), 0.0);
    double g0 = 1.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (i == k) continue;
      g0 *= std::pow(groups[i].lambda / (s0 + groups[i].lambda), groups[i].mult);
    }
    gd[0] = g0;
    for (int n = 0; n + 1 < m; ++n) {
      double acc = 0.0;
      double binom = 1.0;
      for (int r = 0; r <= n; ++r) {
        acc += binom * hd[static_cast<std::size_t>(r)] * gd[static_cast<std::size_t>(n - r)];
        binom = binom * (n - r) / (r + 1);
      }
      gd[static_cast<std::size_t>(n + 1)] = acc;
    }
    const double lam = groups[k].lambda;
    for (int j = 1; j <= m; ++j) {
      const double coeff =
          std::pow(lam, m) * gd[static_cast<std::size_t>(m - j)] / std::tgamma(m - j + 1.0);
      tail.add(coeff / std::pow(lam, j) * erlang_survival(j, lam * c));
    }
  }
  return std::clamp(tail.value(), 0.0, 1.0);
}

/// Gamma(D, R) for a MISO channel and arbitrary diagonal allocation.
inline double miso_gpr(const PowerAllocation& alloc, const SystemParams& params) {
  const double total = alloc.total();
  if (!(total > 0.0)) throw ZeroPower();
  return params.rate() * miso_success_probability(alloc, params) / total;
}

// ---------------------------------------------------------------------------
// Static and fast-fading energy efficiency.

/// log2|I + rho H D H^H| / Tr(D) for a known channel.
inline double static_efficiency(const ChannelSample& h, const PowerAllocation& alloc,
                                const SystemParams& params) {
  const double total = alloc.total();
  if (!(total > 0.0)) throw ZeroPower();
  return mutual_information(h, alloc, params) / total;
}

/// Supremum of the static efficiency, reached as Q -> 0 along UPA:
/// Tr(HH^H) / (n_t sigma2 ln 2).
inline double static_efficiency_sup(const ChannelSample& h, const SystemParams& params) {
  return h.h.squaredNorm() / (params.n_t() * params.sigma2() * kLn2);
}

/// Fast-fading counterpart with E[Tr(HH^H)] = n_t n_r: n_r / (sigma2 ln 2).
inline double fast_efficiency_sup(const SystemParams& params) {
  return params.n_r() / (params.sigma2() * kLn2);
}

}  // namespace mimoee
