#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mimoee/error.hpp"

namespace mimoee {

inline constexpr double kLn2 = 0.69314718055994530942;
inline constexpr double kLog2E = 1.44269504088896340736;

// Relative tolerance for structural predicates (UPA / beamforming).
inline constexpr double kStructuralTol = 1e-12;
// Relative tolerance for comparing user-supplied totals.
inline constexpr double kTotalTol = 1e-9;

/// Converts an SNR scale in dB to the noise power it implies (rho = 1/sigma2).
inline double sigma2_from_rho_db(double rho_db) { return std::pow(10.0, -rho_db / 10.0); }

/// Unvalidated parameter record, as read from flags or config files.
struct RawParams {
  long long n_t = 0;
  long long n_r = 0;
  double sigma2 = 0.0;
  double rate = 0.0;
  double p_max = 0.0;
};

/// Link constants shared by every formula: antenna counts, noise power
/// sigma2 (W), target rate R (bits per channel use) and power budget (W).
///
/// Only constructible through validate_params(), so every instance satisfies
/// the positivity invariants. rho, c and d are derived on demand.
class SystemParams {
 public:
  int n_t() const noexcept { return n_t_; }
  int n_r() const noexcept { return n_r_; }
  double sigma2() const noexcept { return sigma2_; }
  double rate() const noexcept { return rate_; }
  double p_max() const noexcept { return p_max_; }

  double rho() const noexcept { return 1.0 / sigma2_; }
  /// c = sigma2 (2^R - 1): the per-antenna SNR threshold scaled to Watts.
  double c() const noexcept { return sigma2_ * std::expm1(rate_ * kLn2); }
  /// d = n_t c.
  double d() const noexcept { return n_t_ * c(); }

  SystemParams with_p_max(double p_max) const;
  SystemParams with_sigma2(double sigma2) const;
  SystemParams with_antennas(long long n_t, long long n_r) const;

  friend SystemParams validate_params(const RawParams& raw);

 private:
  SystemParams() = default;
  int n_t_ = 1;
  int n_r_ = 1;
  double sigma2_ = 1.0;
  double rate_ = 1.0;
  double p_max_ = 1.0;
};

inline SystemParams validate_params(const RawParams& raw) {
  if (raw.n_t <= 0) throw NonPositiveField("n_t");
  if (raw.n_r <= 0) throw NonPositiveField("n_r");
  // !(x > 0) also rejects NaN.
  if (!(raw.sigma2 > 0.0) || !std::isfinite(raw.sigma2)) throw NonPositiveField("sigma2");
  if (!(raw.rate > 0.0) || !std::isfinite(raw.rate)) throw NonPositiveField("rate");
  if (!(raw.p_max > 0.0) || !std::isfinite(raw.p_max)) throw NonPositiveField("p_max");
  SystemParams p;
  p.n_t_ = static_cast<int>(raw.n_t);
  p.n_r_ = static_cast<int>(raw.n_r);
  p.sigma2_ = raw.sigma2;
  p.rate_ = raw.rate;
  p.p_max_ = raw.p_max;
  return p;
}

/// Shorthand used throughout tests and experiments.
inline SystemParams make_params(long long n_t, long long n_r, double sigma2, double rate,
                                double p_max) {
  return validate_params(RawParams{n_t, n_r, sigma2, rate, p_max});
}

inline SystemParams SystemParams::with_p_max(double p_max) const {
  return make_params(n_t_, n_r_, sigma2_, rate_, p_max);
}
inline SystemParams SystemParams::with_sigma2(double sigma2) const {
  return make_params(n_t_, n_r_, sigma2, rate_, p_max_);
}
inline SystemParams SystemParams::with_antennas(long long n_t, long long n_r) const {
  return make_params(n_t, n_r, sigma2_, rate_, p_max_);
}

/// Diagonal precoder Diag(p_1..p_{n_t}). Restricting to diagonal precoders
/// is lossless for i.i.d. channels: outage and trace do not depend on the
/// eigenvectors of the covariance.
class PowerAllocation {
 public:
  PowerAllocation() = default;
  explicit PowerAllocation(std::vector<double> powers) : powers_(std::move(powers)) {
    for (double v : powers_) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw InvalidArgument("power allocation entries must be finite and nonnegative");
    }
  }

  static PowerAllocation uniform(int n, double total) {
    return PowerAllocation(std::vector<double>(static_cast<std::size_t>(n), total / n));
  }
  static PowerAllocation zeros(int n) { return PowerAllocation(std::vector<double>(n, 0.0)); }
  static PowerAllocation beamforming(int n, double total, int antenna = 0) {
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    v.at(static_cast<std::size_t>(antenna)) = total;
    return PowerAllocation(std::move(v));
  }
  /// Uniform power over the first `active` antennas out of n.
  static PowerAllocation uniform_subset(int n, int active, double total) {
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < active; ++i) v[static_cast<std::size_t>(i)] = total / active;
    return PowerAllocation(std::move(v));
  }

  std::size_t size() const noexcept { return powers_.size(); }
  double operator[](std::size_t i) const { return powers_[i]; }
  std::span<const double> powers() const noexcept { return powers_; }

  double total() const noexcept { return std::accumulate(powers_.begin(), powers_.end(), 0.0); }

  bool is_upa() const noexcept {
    if (powers_.empty()) return false;
    const auto [lo, hi] = std::minmax_element(powers_.begin(), powers_.end());
    return *hi - *lo <= kStructuralTol * std::max(std::abs(*hi), 1e-300);
  }

  bool is_beamforming() const noexcept {
    const double tot = total();
    if (tot <= 0.0) return false;
    int nonzero = 0;
    for (double v : powers_)
      if (v > kStructuralTol * tot) ++nonzero;
    return nonzero == 1;
  }

  std::size_t active_count(double rel_tol = kStructuralTol) const noexcept {
    const double tot = total();
    return static_cast<std::size_t>(std::count_if(
        powers_.begin(), powers_.end(), [&](double v) { return v > rel_tol * tot; }));
  }

  /// Checks dimension and budget against the link parameters.
  void check_against(const SystemParams& params) const {
    if (powers_.size() != static_cast<std::size_t>(params.n_t()))
      throw DimensionMismatch("allocation length " + std::to_string(powers_.size()) +
                              " != n_t " + std::to_string(params.n_t()));
    if (total() > params.p_max() * (1.0 + kStructuralTol))
      throw InvalidArgument("allocation exceeds the power budget");
  }

  friend bool operator==(const PowerAllocation&, const PowerAllocation&) = default;

 private:
  std::vector<double> powers_;
};

/// One realization of the n_r x n_t channel matrix.
struct ChannelSample {
  Eigen::MatrixXcd h;

  int n_r() const noexcept { return static_cast<int>(h.rows()); }
  int n_t() const noexcept { return static_cast<int>(h.cols()); }
  bool is_finite() const { return h.allFinite(); }
};

/// Monte Carlo estimate of a scalar.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long long trials = 0;
};

struct GprPoint {
  double p = 0.0;
  double gamma = 0.0;
  double std_error = 0.0;  // zero for closed-form evaluators
};

/// Sampled Gamma(p) curve with its located maximizer.
struct GprCurve {
  std::vector<GprPoint> grid;
  double p_star = 0.0;
  double gamma_star = 0.0;
  // Set when the grid scan shows more than one strict local maximum.
  bool multimodal = false;

  double max_std_error() const {
    double m = 0.0;
    for (const auto& pt : grid) m = std::max(m, pt.std_error);
    return m;
  }
};

enum class Majorization { kYes, kNo, kIncomparable };

inline const char* to_string(Majorization m) {
  switch (m) {
    case Majorization::kYes: return "yes";
    case Majorization::kNo: return "no";
    case Majorization::kIncomparable: return "incomparable";
  }
  return "?";
}

/// Does p majorize q? Compares sorted-descending prefix sums; vectors with
/// different totals are incomparable.
inline Majorization majorizes(const PowerAllocation& p, const PowerAllocation& q) {
  if (p.size() != q.size()) throw LengthMismatch("majorizes: vectors differ in length");
  const double tp = p.total();
  const double tq = q.total();
  const double scale = std::max({std::abs(tp), std::abs(tq), 1e-300});
  if (std::abs(tp - tq) > kTotalTol * scale) return Majorization::kIncomparable;

  std::vector<double> a(p.powers().begin(), p.powers().end());
  std::vector<double> b(q.powers().begin(), q.powers().end());
  std::sort(a.begin(), a.end(), std::greater<>());
  std::sort(b.begin(), b.end(), std::greater<>());
  double sa = 0.0;
  double sb = 0.0;
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    sa += a[k];
    sb += b[k];
    if (sa < sb - kTotalTol * scale) return Majorization::kNo;
  }
  return Majorization::kYes;
}

}  // namespace mimoee
