#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mimoee/core.hpp"

namespace mimoee {

/// Gaussian tail Q(x) = Pr[N(0,1) > x], via erfc for full accuracy in both tails.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// ---------------------------------------------------------------------------
// Regime (a): n_t fixed, n_r large. The mutual information under UPA is
// approximately N(n_t log2(1 + (n_r/n_t) rho p), (n_t/n_r) log2 e).

inline double goodput_regime_a(double p, const SystemParams& params) {
  if (p < 0.0) throw InvalidArgument("goodput_regime_a: negative power");
  const double nt = params.n_t();
  const double nr = params.n_r();
  const double mean_nats = nt * std::log1p(nr / nt * params.rho() * p);
  const double sd = std::sqrt(nt / nr * kLog2E);
  return params.rate() * q_function((params.rate() - mean_nats * kLog2E) / sd);
}

/// Closed-form inflection point of the regime-(a) goodput. Tends to 0 as
/// n_r grows (channel hardening).
inline double inflection_regime_a(const SystemParams& params) {
  const double nt = params.n_t();
  const double nr = params.n_r();
  const double exponent = (params.rate() - std::pow(nt * kLog2E / nr, 1.5) / nt) / nt;
  return nt / (nr * params.rho()) * std::expm1(exponent * kLn2);
}

// ---------------------------------------------------------------------------
// Regime (b): n_t large, n_r fixed.

/// Q-function argument alpha_b(p); singular at p = 0.
inline double alpha_regime_b(double p, const SystemParams& params) {
  const double snr = params.rho() * p;
  const double nt = params.n_t();
  const double nr = params.n_r();
  const double gap = params.rate() - nr * std::log1p(snr) * kLog2E;
  return std::sqrt(nt / nr) * kLog2E * (1.0 + snr) / snr * gap;
}

/// R Q(alpha_b(p)); 0 at p = 0 by continuity.
inline double goodput_regime_b(double p, const SystemParams& params) {
  if (p < 0.0) throw InvalidArgument("goodput_regime_b: negative power");
  if (p == 0.0) return 0.0;
  return params.rate() * q_function(alpha_regime_b(p, params));
}

/// Inflection point of the regime-(b) goodput, sigma2 (2^{R/n_r} - 1).
inline double inflection_regime_b(const SystemParams& params) {
  return params.sigma2() * std::expm1(params.rate() / params.n_r() * kLn2);
}

struct RegimeBLimits {
  double p_star = 0.0;      // W
  double gamma_star = 0.0;  // bits/J
};

/// n_t -> infinity limits: the optimal power approaches the inflection point
/// and the efficiency approaches N_b(p~_b) / p~_b = (R/2) / p~_b.
inline RegimeBLimits regime_b_limits(const SystemParams& params) {
  const double p = inflection_regime_b(params);
  return {p, 0.5 * params.rate() / p};
}

// ---------------------------------------------------------------------------
// Regime (c): n_t, n_r large with n_r / n_t -> beta.

/// How the gamma term of mu_I is read. The literal expression subtracts
/// gamma from quantities in bits; kNatsCorrected converts it with log2 e.
/// Monte Carlo at n_t = n_r = 8 only agrees with the corrected form.
enum class MuConvention { kVerbatim, kNatsCorrected };

struct RegimeCTerms {
  double gamma = 0.0;
  double mu = 0.0;        // bits, per transmit antenna
  double variance = 0.0;  // sigma_I^2
};

inline RegimeCTerms regime_c_terms(double p, double rho, double beta,
                                   MuConvention conv = MuConvention::kNatsCorrected) {
  if (!(beta > 0.0)) throw NonPositiveField("beta");
  if (!(p > 0.0)) throw ZeroPower();
  const double snr = rho * p;
  const double a = 1.0 + beta + 1.0 / snr;
  const double disc = std::max(0.0, a * a - 4.0 * beta);
  // gamma = (a - sqrt(disc)) / 2, rewritten to avoid cancellation when a is large.
  double gamma = 2.0 * beta / (a + std::sqrt(disc));
  gamma = std::clamp(gamma, 0.0, std::min(1.0, beta));

  RegimeCTerms t;
  t.gamma = gamma;
  const double gamma_term = conv == MuConvention::kNatsCorrected ? gamma * kLog2E : gamma;
  t.mu = (beta * std::log1p(snr * (1.0 - gamma)) + std::log1p(snr * (beta - gamma))) * kLog2E -
         gamma_term;
  t.variance = -std::log1p(-gamma * gamma / beta) * kLog2E;
  return t;
}

inline double goodput_regime_c(double p, const SystemParams& params, double beta,
                               MuConvention conv = MuConvention::kNatsCorrected) {
  if (!(beta > 0.0)) throw NonPositiveField("beta");
  if (p < 0.0) throw InvalidArgument("goodput_regime_c: negative power");
  if (p == 0.0) return 0.0;
  const auto t = regime_c_terms(p, params.rho(), beta, conv);
  if (!(t.variance > 0.0)) return params.rate() * (params.n_t() * t.mu >= params.rate() ? 1.0 : 0.0);
  return params.rate() *
         q_function((params.rate() - params.n_t() * t.mu) / std::sqrt(t.variance));
}

/// Large-n_t regime-(c) inflection point. Dropping lower-order n_t terms the
/// inflection condition reduces to mu_I(p) = 0, whose only root is p = 0.
inline double inflection_regime_c(const SystemParams& /*params*/, double beta) {
  if (!(beta > 0.0)) throw NonPositiveField("beta");
  return 0.0;
}

}  // namespace mimoee
