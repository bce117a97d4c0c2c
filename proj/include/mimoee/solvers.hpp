#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "mimoee/closed_form.hpp"
#include "mimoee/core.hpp"

namespace mimoee {

/// Bisection to adjacent doubles (or |hi - lo| <= abs_tol). Requires a sign
/// change on [lo, hi]; an exact zero at either end is returned as is.
template <typename F>
double bisect(F&& f, double lo, double hi, double abs_tol = 0.0) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    throw BracketFailure("bisect: no sign change on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi || hi - lo <= abs_tol) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

/// phi_n(y) = y^n / (n-1)! - sum_{i<n} y^i / i!. Its positive root sets the
/// interior UPA optimum d / nu_n.
inline double phi(int n, double y) {
  if (n < 1) throw NonPositiveField("n");
  detail::CompensatedSum s;
  double term = 1.0;  // y^i / i!
  for (int i = 0; i < n; ++i) {
    if (i > 0) term *= y / i;
    s.add(-term);
  }
  // term is now y^{n-1} / (n-1)!
  s.add(term * y);
  return s.value();
}

/// Unique positive root nu_n of phi_n. phi_n(0) = -1 and phi_n(n) > 0 for
/// n >= 2 (phi_1(1) = 0), so [0, n] brackets it.
inline double solve_nu(int n) {
  if (n < 1) throw NonPositiveField("n");
  return bisect([n](double y) { return phi(n, y); }, 0.0, static_cast<double>(n));
}

/// Antenna-count switching thresholds c_1 > c_2 > ... > c_{n_t-1}.
struct ThresholdTable {
  int n_t = 1;
  std::vector<double> c_values;  // c_values[l-1] = c_l

  /// c_l with c_0 = +inf and c_{n_t} = 0.
  double at(int l) const {
    if (l <= 0) return std::numeric_limits<double>::infinity();
    if (l >= n_t) return 0.0;
    return c_values[static_cast<std::size_t>(l - 1)];
  }
  /// Budget interval [c / c_{l-1}, c / c_l) on which l active antennas are optimal.
  double lower_power(int l, double c) const { return c / at(l - 1); }
  double upper_power(int l, double c) const {
    const double cl = at(l);
    return cl == 0.0 ? std::numeric_limits<double>::infinity() : c / cl;
  }
};

namespace detail {

// Sign of Pr[Erlang(l+1) <= (l+1) x] - Pr[Erlang(l) <= l x], evaluated as a
// CDF difference while both CDFs are small and as a log-survival difference
// otherwise (the plain difference underflows to 0 for large x).
inline double threshold_equation(int l, double x) {
  const double a = erlang_cdf(l + 1, (l + 1) * x);
  const double b = erlang_cdf(l, l * x);
  if (a < 0.5 && b < 0.5) return a - b;
  return log_erlang_survival(l, l * x) - log_erlang_survival(l + 1, (l + 1) * x);
}

}  // namespace detail

/// Root of the scaled Erlang CDF crossing for one l, by bracket expansion
/// from [1e-9, 1] up to [1e-9, 1e3].
inline double solve_c_threshold(int l) {
  if (l < 1) throw NonPositiveField("l");
  const double lo = 1e-9;
  if (!(detail::threshold_equation(l, lo) < 0.0))
    throw BracketFailure("c threshold: equation not negative near 0 for l=" + std::to_string(l));
  double hi = 1.0;
  while (!(detail::threshold_equation(l, hi) > 0.0)) {
    hi *= 2.0;
    if (hi > 1e3)
      throw BracketFailure("c threshold: no sign change in [1e-9, 1e3] for l=" +
                           std::to_string(l));
  }
  return bisect([l](double x) { return detail::threshold_equation(l, x); }, lo, hi);
}

inline ThresholdTable solve_c_thresholds(int n_t) {
  if (n_t < 2) throw InvalidArgument("solve_c_thresholds requires n_t >= 2");
  ThresholdTable t;
  t.n_t = n_t;
  for (int l = 1; l < n_t; ++l) t.c_values.push_back(solve_c_threshold(l));
  return t;
}

/// Write-once cache of threshold tables keyed by n_t.
inline const ThresholdTable& cached_thresholds(int n_t) {
  static std::mutex mu;
  static std::map<int, ThresholdTable> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n_t);
  if (it == cache.end()) it = cache.emplace(n_t, solve_c_thresholds(n_t)).first;
  return it->second;
}

struct MisoPrecoderSolution {
  int active_antennas = 1;
  double per_antenna_power = 0.0;
  // True when the power budget binds (l * per_antenna_power == p_max).
  bool saturated = false;

  double total_power() const { return active_antennas * per_antenna_power; }
  PowerAllocation allocation(int n_t) const {
    return PowerAllocation::uniform_subset(n_t, active_antennas, total_power());
  }
};

/// GPR-optimal diagonal precoder for a MISO channel: full power spread over
/// l antennas while the budget sits in [c/c_{l-1}, c/c_l); past c/c_{n_t-1},
/// UPA over all antennas with per-antenna power min{c/nu_{n_t}, p_max/n_t}.
/// At an exact boundary c/c_l the larger count l+1 is used.
inline MisoPrecoderSolution miso_optimal_precoder(const SystemParams& params) {
  if (params.n_r() != 1) throw NotMiso();
  const int n_t = params.n_t();
  const double c = params.c();
  const double budget = params.p_max();
  if (n_t == 1) {
    const double p = std::min(c, budget);
    return {1, p, budget <= c};
  }
  const ThresholdTable& table = cached_thresholds(n_t);
  for (int l = 1; l < n_t; ++l) {
    if (budget < table.upper_power(l, c)) return {l, budget / l, true};
  }
  const double interior = c / solve_nu(n_t);
  const double capped = budget / n_t;
  return {n_t, std::min(interior, capped), capped <= interior};
}

/// Gamma at the optimal MISO precoder, evaluated in closed form.
inline double miso_optimal_gpr(const SystemParams& params) {
  const auto sol = miso_optimal_precoder(params);
  const double per = sol.per_antenna_power;
  return params.rate() * erlang_survival(sol.active_antennas, params.c() / per) /
         sol.total_power();
}

inline double siso_optimal_power(const SystemParams& params) {
  return std::min(params.c(), params.p_max());
}

/// Interior UPA optimum min{d / nu_{n_t}, p_max} for MISO channels.
inline double miso_upa_optimal_power(const SystemParams& params) {
  if (params.n_r() != 1) throw NotMiso();
  return std::min(params.d() / solve_nu(params.n_t()), params.p_max());
}

/// SIMO optimum min{c / nu_{n_r}, p_max}.
inline double simo_optimal_power(const SystemParams& params) {
  if (params.n_t() != 1) throw NotSimo();
  return std::min(params.c() / solve_nu(params.n_r()), params.p_max());
}

}  // namespace mimoee
