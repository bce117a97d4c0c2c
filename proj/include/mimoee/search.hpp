#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mimoee/channel_mc.hpp"
#include "mimoee/closed_form.hpp"
#include "mimoee/core.hpp"
#include "mimoee/solvers.hpp"

namespace mimoee {

// ---------------------------------------------------------------------------
// One-dimensional maximization of Gamma_UPA(p).

struct MaximizeOptions {
  // Grid spans [p_max * min_fraction, p_max] on a log scale.
  double min_fraction = 1e-6;
  double rel_tol = 1e-12;
};

namespace detail {

template <typename F>
GprPoint evaluate_point(F& f, double p) {
  using R = std::invoke_result_t<F&, double>;
  GprPoint pt{p, 0.0, 0.0};
  try {
    if constexpr (std::is_same_v<std::decay_t<R>, McEstimate>) {
      const McEstimate e = f(p);
      pt.gamma = e.mean;
      pt.std_error = e.std_error;
    } else {
      pt.gamma = static_cast<double>(f(p));
    }
  } catch (const EvaluationFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationFailure(std::string("GPR evaluator failed at p=") + std::to_string(p) + ": " +
                            e.what());
  }
  if (!std::isfinite(pt.gamma))
    throw EvaluationFailure("GPR evaluator returned a non-finite value at p=" + std::to_string(p));
  return pt;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

inline int count_strict_local_maxima(const std::vector<GprPoint>& g) {
  int peaks = 0;
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    // Treat plateaus as one point: compare against the nearest differing values.
    if (i > 0 && g[i].gamma == g[i - 1].gamma) continue;
    std::size_t j = i;
    while (j + 1 < n && g[j + 1].gamma == g[i].gamma) ++j;
    const bool left = i == 0 || g[i - 1].gamma < g[i].gamma;
    const bool right = j + 1 == n || g[j + 1].gamma < g[i].gamma;
    const bool flat_everywhere = i == 0 && j + 1 == n;
    if (left && right && !flat_everywhere) ++peaks;
  }
  return peaks;
}

}  // namespace detail

/// Coarse log-spaced scan of Gamma over (0, p_max], then golden-section
/// refinement inside the bracket around the best grid point. `gpr` returns
/// either a double (closed form) or a McEstimate (Monte Carlo).
template <typename F>
GprCurve maximize_upa_gpr(F&& gpr, double p_max, int grid_points, MaximizeOptions opt = {}) {
  if (grid_points < 16) throw InvalidArgument("maximize_upa_gpr: grid_points must be >= 16");
  if (!(p_max > 0.0)) throw NonPositiveField("p_max");

  GprCurve curve;
  for (double p : detail::log_grid(p_max * opt.min_fraction, p_max, grid_points))
    curve.grid.push_back(detail::evaluate_point(gpr, p));
  curve.multimodal = detail::count_strict_local_maxima(curve.grid) > 1;

  const auto best_it =
      std::max_element(curve.grid.begin(), curve.grid.end(),
                       [](const GprPoint& a, const GprPoint& b) { return a.gamma < b.gamma; });
  const auto best = static_cast<std::size_t>(best_it - curve.grid.begin());
  curve.p_star = best_it->p;
  curve.gamma_star = best_it->gamma;

  double a = curve.grid[best == 0 ? 0 : best - 1].p;
  double b = curve.grid[std::min(best + 1, curve.grid.size() - 1)].p;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = detail::evaluate_point(gpr, x1).gamma;
  double f2 = detail::evaluate_point(gpr, x2).gamma;
  for (int it = 0; it < 300 && (b - a) > opt.rel_tol * b; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = detail::evaluate_point(gpr, x2).gamma;
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = detail::evaluate_point(gpr, x1).gamma;
    }
  }
  const GprPoint refined = detail::evaluate_point(gpr, 0.5 * (a + b));
  // Never return something worse than the coarse grid maximum.
  if (refined.gamma > curve.gamma_star) {
    curve.p_star = refined.p;
    curve.gamma_star = refined.gamma;
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Quasi-concavity of sampled curves.

struct UnimodalityReport {
  bool unimodal = true;
  // Grid indices of every significant peak (more than one means a violation).
  std::vector<std::size_t> peaks;
};

/// A curve passes when it rises then falls, tolerating counter-movements up
/// to `noise_band` (absolute). A peak is significant when, on each side, the
/// curve drops by more than the band before reaching a higher value (or the
/// curve ends first).
inline UnimodalityReport unimodality_check(const GprCurve& curve, double noise_band) {
  const auto& g = curve.grid;
  if (g.size() < 16) throw InvalidArgument("unimodality_check: need at least 16 points");
  if (noise_band < 0.0) throw InvalidArgument("unimodality_check: negative noise band");

  UnimodalityReport rep;
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(g[i].gamma > g[i - 1].gamma)) continue;
    if (i + 1 < n && g[i + 1].gamma > g[i].gamma) continue;
    const double v = g[i].gamma;
    auto side_ok = [&](int dir) {
      double lowest = v;
      for (long long j = static_cast<long long>(i) + dir; j >= 0 && j < static_cast<long long>(n);
           j += dir) {
        const double w = g[static_cast<std::size_t>(j)].gamma;
        if (w > v) return lowest < v - noise_band;
        lowest = std::min(lowest, w);
      }
      return true;
    };
    if (side_ok(-1) && side_ok(+1)) rep.peaks.push_back(i);
  }
  rep.unimodal = rep.peaks.size() <= 1;
  return rep;
}

// ---------------------------------------------------------------------------
// Exhaustive search over diagonal precoders.

enum class Structure { kBeamforming, kUpa, kOther };

inline const char* to_string(Structure s) {
  switch (s) {
    case Structure::kBeamforming: return "beamforming";
    case Structure::kUpa: return "upa";
    case Structure::kOther: return "other";
  }
  return "?";
}

inline Structure classify(const PowerAllocation& a) {
  if (a.size() == 1 || a.is_upa()) return Structure::kUpa;
  if (a.is_beamforming()) return Structure::kBeamforming;
  return Structure::kOther;
}

/// Integer-composition grid over power allocations. Directions are the
/// compositions k of `resolution` into n parts (fractions k_i / resolution);
/// each direction is scaled to totals (j / levels) * total_power for
/// j = 1..levels. With levels = 1 only the full budget is used.
struct SimplexGrid {
  int n = 2;
  int resolution = 32;
  double total_power = 1.0;
  int levels = 1;

  static constexpr int kMaxDimension = 4;
  static constexpr int kMaxResolution = 64;

  void validate() const {
    if (n < 1) throw NonPositiveField("n");
    if (resolution < 1) throw NonPositiveField("resolution");
    if (levels < 1) throw NonPositiveField("levels");
    if (!(total_power > 0.0)) throw NonPositiveField("total_power");
    if (n > kMaxDimension || resolution > kMaxResolution || levels > 4096)
      throw GridTooLarge("simplex grid too large: n=" + std::to_string(n) +
                         " resolution=" + std::to_string(resolution));
  }

  /// Sorted-descending compositions: one representative per permutation class.
  std::vector<std::vector<int>> partitions() const {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int remaining, int cap) {
      if (static_cast<int>(cur.size()) == n) {
        if (remaining == 0) out.push_back(cur);
        return;
      }
      const int slots = n - static_cast<int>(cur.size());
      for (int v = std::min(cap, remaining); v >= 0; --v) {
        if (v * slots < remaining) break;
        cur.push_back(v);
        rec(remaining - v, v);
        cur.pop_back();
      }
    };
    rec(resolution, resolution);
    return out;
  }

  /// Every composition of `resolution` into n ordered parts.
  std::vector<std::vector<int>> compositions() const {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int remaining) {
      if (static_cast<int>(cur.size()) == n - 1) {
        cur.push_back(remaining);
        out.push_back(cur);
        cur.pop_back();
        return;
      }
      for (int v = 0; v <= remaining; ++v) {
        cur.push_back(v);
        rec(remaining - v);
        cur.pop_back();
      }
    };
    rec(resolution);
    return out;
  }

  double level_total(int j) const { return total_power * j / levels; }

  PowerAllocation allocation(const std::vector<int>& comp, double total) const {
    std::vector<double> v(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) v[i] = total * comp[i] / resolution;
    return PowerAllocation(std::move(v));
  }
};

enum class Objective { kGpr, kSuccessProbability };

inline std::vector<std::vector<int>> distinct_permutations(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  std::vector<std::vector<int>> out;
  do out.push_back(v);
  while (std::next_permutation(v.begin(), v.end()));
  return out;
}

/// Per-permutation-class success curves along each simplex direction, built
/// once from a channel ensemble. Success at any total is then a lookup, so
/// many budgets can be scanned without resampling. Each class value averages
/// over its distinct permutations (i.i.d. antennas make them equal in law).
class DirectionTable {
 public:
  DirectionTable(const ChannelEnsemble& ensemble, int resolution) : resolution_(resolution) {
    SimplexGrid g{ensemble.params().n_t(), resolution, 1.0, 1};
    g.validate();
    for (auto& part : g.partitions()) {
      Entry e;
      e.partition = part;
      for (auto& perm : distinct_permutations(part)) {
        std::vector<double> dir(perm.begin(), perm.end());
        e.thresholds.push_back(ensemble.thresholds(dir));
      }
      entries_.push_back(std::move(e));
    }
    trials_ = ensemble.trials();
  }

  struct Entry {
    std::vector<int> partition;
    std::vector<std::vector<double>> thresholds;  // one sorted vector per permutation
  };

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  int resolution() const noexcept { return resolution_; }

  McEstimate success(const Entry& e, double total) const {
    if (total <= 0.0) return {0.0, 0.0, trials_};
    double m = 0.0;
    for (const auto& th : e.thresholds) m += ChannelEnsemble::success_at(th, total).mean;
    m /= static_cast<double>(e.thresholds.size());
    return {m, std::sqrt(m * (1.0 - m) / trials_), trials_};
  }

 private:
  int resolution_;
  long long trials_ = 0;
  std::vector<Entry> entries_;
};

struct StructureBest {
  PowerAllocation allocation;
  McEstimate value;
  bool present = false;
};

struct ExhaustiveResult {
  PowerAllocation best;  // canonical: sorted descending
  McEstimate value;
  Structure structure = Structure::kOther;
  // Best value within each structure class (kOther excludes bf and UPA).
  StructureBest beamforming;
  StructureBest upa;
  StructureBest other;
};

/// Exhaustive search on a prebuilt direction table. Success-probability
/// search uses the full budget; GPR search scans every grid level.
inline ExhaustiveResult exhaustive_search(const DirectionTable& table, const SystemParams& params,
                                          Objective objective, const SimplexGrid& grid) {
  grid.validate();
  if (grid.n != params.n_t()) throw DimensionMismatch("simplex grid dimension != n_t");
  if (grid.resolution != table.resolution())
    throw InvalidArgument("simplex grid resolution differs from the direction table");

  ExhaustiveResult res;
  res.value.mean = -std::numeric_limits<double>::infinity();
  const int first_level = objective == Objective::kSuccessProbability ? grid.levels : 1;
  for (const auto& e : table.entries()) {
    for (int j = first_level; j <= grid.levels; ++j) {
      const double total = grid.level_total(j);
      McEstimate s = table.success(e, total);
      McEstimate v = s;
      if (objective == Objective::kGpr) {
        const double k = params.rate() / total;
        v = {k * s.mean, k * s.std_error, s.trials};
      }
      const PowerAllocation alloc = grid.allocation(e.partition, total);
      const Structure st = classify(alloc);
      StructureBest& slot = st == Structure::kBeamforming ? res.beamforming
                            : st == Structure::kUpa       ? res.upa
                                                          : res.other;
      if (!slot.present || v.mean > slot.value.mean) slot = {alloc, v, true};
      if (v.mean > res.value.mean) {
        res.value = v;
        res.best = alloc;
        res.structure = st;
      }
    }
  }
  return res;
}

inline ExhaustiveResult exhaustive_best_allocation(const SystemParams& params, Objective objective,
                                                   const SimplexGrid& grid, const McConfig& cfg) {
  grid.validate();
  if (grid.n != params.n_t()) throw DimensionMismatch("simplex grid dimension != n_t");
  const ChannelEnsemble ensemble(params, cfg);
  const DirectionTable table(ensemble, grid.resolution);
  return exhaustive_search(table, params, objective, grid);
}

// ---------------------------------------------------------------------------
// Conjecture 1: power threshold between outage-optimal and UPA structures.

struct BudgetClassification {
  double budget = 0.0;
  Structure gpr_structure = Structure::kOther;
  Structure outage_structure = Structure::kOther;
  double gpr_best_total = 0.0;
  double gpr_value = 0.0;
  double success_value = 0.0;
  double success_bf = 0.0;
  double success_upa = 0.0;
  double gpr_bf = 0.0;
  double gpr_upa = 0.0;
};

struct StructureInterval {
  double from = 0.0;
  double to = 0.0;
  Structure structure = Structure::kOther;
};

struct ConjectureReport {
  double threshold_estimate = std::numeric_limits<double>::quiet_NaN();  // GPR crossover
  double outage_threshold = std::numeric_limits<double>::quiet_NaN();
  std::vector<StructureInterval> regimes;
  std::vector<BudgetClassification> points;
  std::vector<double> violations;  // budgets breaking the conjectured structure
};

struct ScanOptions {
  int resolution = 32;
  int levels = 64;
  // Bisection stops at this budget interval.
  double min_step = 0.001;
  double noise_sigmas = 4.0;
};

namespace detail {

// Picks beamforming vs UPA by value; reports kOther only when the best
// non-structured allocation beats both by more than the noise band.
inline Structure decide(const ExhaustiveResult& r, double sigmas) {
  const double bf = r.beamforming.present ? r.beamforming.value.mean : -1.0;
  const double upa = r.upa.present ? r.upa.value.mean : -1.0;
  const Structure lead = bf >= upa ? Structure::kBeamforming : Structure::kUpa;
  const StructureBest& lead_slot = lead == Structure::kBeamforming ? r.beamforming : r.upa;
  if (r.other.present) {
    const double band = sigmas * std::hypot(r.other.value.std_error, lead_slot.value.std_error);
    if (r.other.value.mean > lead_slot.value.mean + band) return Structure::kOther;
  }
  return lead;
}

}  // namespace detail

/// Classifies the structure of the GPR-optimal and outage-optimal allocation
/// at one budget, using a shared direction table.
inline BudgetClassification classify_budget(const DirectionTable& table,
                                            const SystemParams& params, double budget,
                                            const ScanOptions& opt) {
  SimplexGrid grid{params.n_t(), opt.resolution, budget, opt.levels};
  const auto gpr = exhaustive_search(table, params, Objective::kGpr, grid);
  const auto out = exhaustive_search(table, params, Objective::kSuccessProbability, grid);
  BudgetClassification b;
  b.budget = budget;
  b.gpr_structure = detail::decide(gpr, opt.noise_sigmas);
  b.outage_structure = detail::decide(out, opt.noise_sigmas);
  b.gpr_best_total = gpr.best.total();
  b.gpr_value = gpr.value.mean;
  b.success_value = out.value.mean;
  b.success_bf = out.beamforming.value.mean;
  b.success_upa = out.upa.value.mean;
  b.gpr_bf = gpr.beamforming.value.mean;
  b.gpr_upa = gpr.upa.value.mean;
  return b;
}

inline ConjectureReport conjecture1_scan(const SystemParams& params,
                                         const std::vector<double>& budgets,
                                         const McConfig& cfg, const ScanOptions& opt = {}) {
  if (budgets.empty()) throw InvalidArgument("conjecture1_scan: no budgets");
  if (!std::is_sorted(budgets.begin(), budgets.end()))
    throw InvalidArgument("conjecture1_scan: budgets must be increasing");
  const ChannelEnsemble ensemble(params, cfg);
  const DirectionTable table(ensemble, opt.resolution);

  ConjectureReport rep;
  for (double b : budgets) rep.points.push_back(classify_budget(table, params, b, opt));

  // Bisection on the classifier between the last bf budget and the next UPA one.
  auto locate = [&](auto structure_of) {
    for (std::size_t i = 0; i + 1 < rep.points.size(); ++i) {
      if (structure_of(rep.points[i]) == Structure::kBeamforming &&
          structure_of(rep.points[i + 1]) == Structure::kUpa) {
        double lo = rep.points[i].budget;
        double hi = rep.points[i + 1].budget;
        while (hi - lo > opt.min_step) {
          const double mid = 0.5 * (lo + hi);
          if (structure_of(classify_budget(table, params, mid, opt)) == Structure::kBeamforming)
            lo = mid;
          else
            hi = mid;
        }
        return 0.5 * (lo + hi);
      }
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  rep.threshold_estimate = locate([](const BudgetClassification& c) { return c.gpr_structure; });
  rep.outage_threshold = locate([](const BudgetClassification& c) { return c.outage_structure; });

  for (const auto& pt : rep.points) {
    if (rep.regimes.empty() || rep.regimes.back().structure != pt.gpr_structure)
      rep.regimes.push_back({pt.budget, pt.budget, pt.gpr_structure});
    rep.regimes.back().to = pt.budget;

    // Below the threshold the GPR optimum must share the outage-optimal
    // structure; above it, UPA.
    const bool below = !(pt.budget > rep.threshold_estimate);
    const bool bad = pt.gpr_structure == Structure::kOther ||
                     (below && pt.gpr_structure != pt.outage_structure) ||
                     (!below && pt.gpr_structure != Structure::kUpa);
    if (bad) rep.violations.push_back(pt.budget);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// TISO counter-example to joint quasi-concavity.

struct TisoWitness {
  double q = 0.0;
  double gamma_q = 0.0;        // Gamma(q, 0) = Gamma(0, q)
  double gamma_swapped = 0.0;  // Gamma(0, q)
  double gamma_midpoint = 0.0; // Gamma(q/2, q/2)
  PowerAllocation first;
  PowerAllocation second;
  PowerAllocation midpoint;
  // The level set {Gamma >= gamma_q} holds both endpoints but not the midpoint.
  bool level_set_nonconvex = false;
};

inline TisoWitness tiso_counterexample(const SystemParams& params) {
  if (params.n_r() != 1) throw NotMiso();
  if (params.n_t() != 2) throw InvalidArgument("tiso_counterexample requires n_t = 2");
  const double c1 = cached_thresholds(2).at(1);
  TisoWitness w;
  w.q = 0.5 * std::min(params.p_max(), params.c() / c1);
  w.first = PowerAllocation({w.q, 0.0});
  w.second = PowerAllocation({0.0, w.q});
  w.midpoint = PowerAllocation({0.5 * w.q, 0.5 * w.q});
  w.gamma_q = miso_gpr(w.first, params);
  w.gamma_swapped = miso_gpr(w.second, params);
  w.gamma_midpoint = miso_gpr(w.midpoint, params);
  w.level_set_nonconvex = w.gamma_midpoint < w.gamma_q && w.gamma_swapped >= w.gamma_q;
  if (!w.level_set_nonconvex)
    throw NoWitness("midpoint does not leave the upper-level set at q=" + std::to_string(w.q));
  return w;
}

// ---------------------------------------------------------------------------
// Schur properties at extreme SNR.

enum class SnrRegime { kLow, kHigh };

struct SchurVerdict {
  bool pass = false;
  Structure argmax = Structure::kOther;  // at the full-budget slice
  std::vector<Structure> slice_argmax;   // per grid level
  long long pairs_checked = 0;
  long long violations = 0;
  bool closed_form = false;
};

/// Checks monotonicity of Gamma along the majorization order within every
/// equal-total slice of the grid: Schur-convex (beamforming best) at low SNR,
/// Schur-concave (UPA best) at high SNR. MISO uses the closed form; other
/// shapes use Monte Carlo with a 4-sigma joint band.
inline SchurVerdict schur_extreme_snr_check(const SystemParams& params, SnrRegime regime,
                                            const SimplexGrid& grid, const McConfig& cfg) {
  grid.validate();
  if (grid.n != params.n_t()) throw DimensionMismatch("simplex grid dimension != n_t");
  if (regime == SnrRegime::kLow && params.sigma2() < 10.0 * (1.0 - 1e-12))
    throw InvalidArgument("low-SNR check needs rho <= -10 dB");
  if (regime == SnrRegime::kHigh && params.sigma2() > 1e-3 * (1.0 + 1e-12))
    throw InvalidArgument("high-SNR check needs rho >= 30 dB");

  SchurVerdict v;
  v.closed_form = params.n_r() == 1;
  std::optional<ChannelEnsemble> ensemble;
  if (!v.closed_form) ensemble.emplace(params, cfg);

  const auto comps = grid.compositions();
  for (int j = 1; j <= grid.levels; ++j) {
    const double total = grid.level_total(j);
    std::vector<PowerAllocation> allocs;
    std::vector<McEstimate> values;
    for (const auto& k : comps) {
      allocs.push_back(grid.allocation(k, total));
      if (v.closed_form) {
        values.push_back({miso_gpr(allocs.back(), params), 0.0, 0});
      } else {
        const McEstimate s = ensemble->success_probability(allocs.back());
        const double f = params.rate() / total;
        values.push_back({f * s.mean, f * s.std_error, s.trials});
      }
    }
    std::size_t best = 0;
    for (std::size_t a = 0; a < allocs.size(); ++a) {
      if (values[a].mean > values[best].mean) best = a;
      for (std::size_t b = 0; b < allocs.size(); ++b) {
        if (majorizes(allocs[a], allocs[b]) != Majorization::kYes) continue;
        ++v.pairs_checked;
        const double band = v.closed_form
                                ? 1e-12 * std::max(values[a].mean, values[b].mean)
                                : 4.0 * std::hypot(values[a].std_error, values[b].std_error);
        const bool ok = regime == SnrRegime::kLow ? values[a].mean >= values[b].mean - band
                                                  : values[a].mean <= values[b].mean + band;
        if (!ok) ++v.violations;
      }
    }
    v.slice_argmax.push_back(classify(allocs[best]));
  }
  v.argmax = v.slice_argmax.back();
  const Structure expected = regime == SnrRegime::kLow ? Structure::kBeamforming : Structure::kUpa;
  v.pass = v.violations == 0 &&
           std::all_of(v.slice_argmax.begin(), v.slice_argmax.end(),
                       [&](Structure s) { return s == expected; });
  return v;
}

// ---------------------------------------------------------------------------
// Trace / log-det inequality behind the static-channel result.

/// E = Tr[(I+S)^{-1} S] - log2|I+S| with S = rho H Diag(p) H^H.
inline double appendix_a_quantity(const ChannelSample& h, const PowerAllocation& alloc,
                                  const SystemParams& params) {
  if (h.n_t() != static_cast<int>(alloc.size()))
    throw DimensionMismatch("appendix_a_quantity: allocation length != n_t");
  if (alloc.total() == 0.0) return 0.0;
  Eigen::VectorXd d(h.n_t());
  for (int i = 0; i < h.n_t(); ++i) d(i) = params.rho() * alloc[static_cast<std::size_t>(i)];
  const Eigen::MatrixXcd s = h.h * d.asDiagonal() * h.h.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s, Eigen::EigenvaluesOnly);
  double e = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = std::max(0.0, es.eigenvalues()(i));
    e += lam / (1.0 + lam) - std::log1p(lam) * kLog2E;
  }
  return e;
}

struct InequalityVerdict {
  bool pass = true;
  long long samples = 0;
  double max_value = -std::numeric_limits<double>::infinity();
  std::vector<long long> violations;  // sample indices with E > slack
};

/// Draws H and p (log-uniform per antenna over [1e-2, 1e2] x p_max) per
/// sample and asserts E <= slack.
inline InequalityVerdict appendix_a_inequality_check(long long samples, const SystemParams& params,
                                                     const McConfig& cfg, double slack = 1e-9) {
  if (samples < 1) throw NonPositiveField("samples");
  InequalityVerdict v;
  v.samples = samples;
  for (long long s = 0; s < samples; ++s) {
    const auto h = sample_channel(params, cfg.seed, static_cast<std::uint64_t>(s));
    std::vector<double> p(static_cast<std::size_t>(params.n_t()));
    for (int i = 0; i < params.n_t(); ++i) {
      const double u = uniform(cfg.seed, static_cast<std::uint64_t>(s),
                               static_cast<std::uint32_t>(i), Stream::kAllocation);
      p[static_cast<std::size_t>(i)] = params.p_max() * std::pow(10.0, 4.0 * u - 2.0);
    }
    const double e = appendix_a_quantity(h, PowerAllocation(std::move(p)), params);
    v.max_value = std::max(v.max_value, e);
    if (e > slack) {
      v.violations.push_back(s);
      v.pass = false;
    }
  }
  return v;
}

}  // namespace mimoee
