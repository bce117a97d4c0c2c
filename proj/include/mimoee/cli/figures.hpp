#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "mimoee/asymptotics.hpp"
#include "mimoee/channel_mc.hpp"
#include "mimoee/cli/experiment.hpp"
#include "mimoee/closed_form.hpp"
#include "mimoee/search.hpp"
#include "mimoee/solvers.hpp"

namespace mimoee::cli {

using Record = std::vector<std::pair<std::string, std::string>>;

struct FigureOutput {
  std::vector<CsvTable> tables;
  Record summary;
};

inline constexpr std::array<int, 4> kFamily{1, 2, 4, 8};

/// Scenario constants per figure.
inline Defaults figure_defaults(int id) {
  Defaults d;
  switch (id) {
    case 1:
    case 2: d.n_t = 1; d.n_r = 1; d.rho_db = 10.0; d.rate = 1.0; d.p_max = 1.0; break;
    case 3: d.n_t = 1; d.n_r = 2; d.rho_db = 10.0; d.rate = 1.0; d.p_max = 1.0; break;
    case 4: d.n_t = 4; d.n_r = 1; d.rho_db = 10.0; d.rate = 3.0; d.p_max = 2.0; d.grid_points = 200; break;
    case 5:
    case 6: d.n_t = 2; d.n_r = 2; d.rho_db = 3.0; d.rate = 1.0; d.p_max = 0.5; d.grid_points = 49; break;
    default: throw ConfigError("unknown figure id " + std::to_string(id) + " (expected 1-6)");
  }
  return d;
}

namespace detail {

inline std::vector<double> linear_budgets(double p_max, int n) {
  std::vector<double> b(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = p_max * (i + 1) / n;
  return b;
}

// UPA curve of one antenna configuration on a fixed grid, plus its maximizer.
struct UpaCurve {
  std::vector<McEstimate> values;
  GprCurve best;
};

inline UpaCurve upa_curve(const SystemParams& params, const McConfig& mc,
                          const std::vector<double>& grid, int grid_points) {
  const ChannelEnsemble ens(params, mc);
  const std::vector<double> dir(static_cast<std::size_t>(params.n_t()), 1.0);
  const auto th = ens.thresholds(dir);
  const double r = params.rate();
  auto eval = [&](double p) -> McEstimate {
    const auto s = ChannelEnsemble::success_at(th, p);
    return {r * s.mean / p, r * s.std_error / p, s.trials};
  };
  UpaCurve c;
  for (double p : grid) c.values.push_back(eval(p));
  c.best = maximize_upa_gpr(eval, params.p_max(), grid_points, MaximizeOptions{1e-4, 1e-9});
  return c;
}

inline double structure_code(Structure s) { return static_cast<double>(static_cast<int>(s)); }

inline FigureOutput upa_family_figure(const ExperimentConfig& cfg, bool square, const std::string& name,
                                      const std::string& column_prefix) {
  const int gp = static_cast<int>(cfg.grid_points);
  const auto grid = mimoee::detail::log_grid(cfg.params.p_max() * 1e-3, cfg.params.p_max(), gp);
  std::vector<UpaCurve> curves;
  for (int n : kFamily) {
    const auto p = cfg.params.with_antennas(n, square ? n : cfg.params.n_r());
    curves.push_back(upa_curve(p, cfg.mc(), grid, gp));
  }
  FigureOutput out;
  CsvTable t{name + ".csv", {"p"}, {}};
  for (int n : kFamily) t.header.push_back(column_prefix + std::to_string(n));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i]};
    for (const auto& c : curves) row.push_back(c.values[i].mean);
    t.rows.push_back(std::move(row));
  }
  CsvTable peaks{name + "_peaks.csv", {"n", "p_star", "gamma_star", "std_error"}, {}};
  for (std::size_t k = 0; k < kFamily.size(); ++k) {
    const auto& b = curves[k].best;
    peaks.rows.push_back({static_cast<double>(kFamily[k]), b.p_star, b.gamma_star, b.max_std_error()});
    const std::string label = column_prefix.substr(6) + std::to_string(kFamily[k]);
    out.summary.emplace_back("p_star_" + label, format_shortest(b.p_star));
    out.summary.emplace_back("gamma_star_" + label, format_shortest(b.gamma_star));
  }
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(peaks));
  return out;
}

inline FigureOutput figure_1(const ExperimentConfig& cfg) {
  auto out = upa_family_figure(cfg, true, "fig1", "gamma_n");
  out.tables.pop_back();
  return out;
}

inline FigureOutput figure_2(const ExperimentConfig& cfg) {
  auto full = upa_family_figure(cfg, true, "fig2", "gamma_n");
  FigureOutput out;
  out.summary = full.summary;
  CsvTable t = full.tables.back();
  t.name = "fig2.csv";
  out.tables.push_back(std::move(t));
  return out;
}

inline FigureOutput figure_3(const ExperimentConfig& cfg) {
  auto out = upa_family_figure(cfg, false, "fig3", "gamma_nt");
  const auto lim = regime_b_limits(cfg.params);
  out.summary.emplace_back("regime_b_p_star", format_shortest(lim.p_star));
  out.summary.emplace_back("regime_b_gamma_star", format_shortest(lim.gamma_star));
  return out;
}

// Closed-form MISO: Gamma with the whole budget spread uniformly over l
// antennas, and the optimal precoder.
inline FigureOutput figure_4(const ExperimentConfig& cfg) {
  if (cfg.params.n_r() != 1) throw ConfigError("figure 4 is a MISO figure (nr must be 1)");
  const int n_t = cfg.params.n_t();
  const auto grid = mimoee::detail::log_grid(cfg.params.p_max() * 5e-3, cfg.params.p_max(),
                             static_cast<int>(cfg.grid_points));
  CsvTable t{"fig4.csv", {"pmax"}, {}};
  for (int l = 1; l <= n_t; ++l) t.header.push_back("gamma_l" + std::to_string(l));
  t.header.insert(t.header.end(), {"gamma_opt", "active_antennas", "per_antenna_power"});
  for (double b : grid) {
    const auto p = cfg.params.with_p_max(b);
    std::vector<double> row{b};
    for (int l = 1; l <= n_t; ++l)
      row.push_back(miso_gpr(PowerAllocation::uniform_subset(n_t, l, b), p));
    const auto sol = miso_optimal_precoder(p);
    row.push_back(miso_optimal_gpr(p));
    row.push_back(sol.active_antennas);
    row.push_back(sol.per_antenna_power);
    t.rows.push_back(std::move(row));
  }
  FigureOutput out;
  out.tables.push_back(std::move(t));
  if (n_t >= 2) {
    const auto& th = cached_thresholds(n_t);
    for (int l = 1; l < n_t; ++l)
      out.summary.emplace_back("switch_power_l" + std::to_string(l) + "_to_l" + std::to_string(l + 1),
                               format_shortest(th.upper_power(l, cfg.params.c())));
  }
  out.summary.emplace_back("upa_interior_power",
                           format_shortest(cfg.params.d() / solve_nu(n_t)));
  return out;
}

inline ScanOptions scan_options(const ExperimentConfig& cfg) {
  ScanOptions o;
  o.resolution = cfg.get<int>("resolution", o.resolution);
  o.levels = cfg.get<int>("levels", o.levels);
  return o;
}

inline ConjectureReport structure_scan(const ExperimentConfig& cfg) {
  return conjecture1_scan(cfg.params,
                          linear_budgets(cfg.params.p_max(), static_cast<int>(cfg.grid_points)),
                          cfg.mc(), scan_options(cfg));
}

inline void threshold_summary(const ConjectureReport& rep, Record& summary) {
  summary.emplace_back("gpr_threshold", format_shortest(rep.threshold_estimate));
  summary.emplace_back("outage_threshold", format_shortest(rep.outage_threshold));
  summary.emplace_back("violations", std::to_string(rep.violations.size()));
}

inline FigureOutput figure_5(const ExperimentConfig& cfg) {
  const auto rep = structure_scan(cfg);
  CsvTable t{"fig5.csv",
             {"pmax", "success_bf", "success_upa", "success_exhaustive", "structure"},
             {}};
  for (const auto& pt : rep.points)
    t.rows.push_back({pt.budget, beamforming_success_probability(pt.budget, cfg.params),
                      pt.success_upa, pt.success_value, structure_code(pt.outage_structure)});
  FigureOutput out;
  out.tables.push_back(std::move(t));
  threshold_summary(rep, out.summary);
  return out;
}

inline FigureOutput figure_6(const ExperimentConfig& cfg) {
  const auto rep = structure_scan(cfg);
  CsvTable t{"fig6.csv",
             {"pmax", "gpr_bf", "gpr_upa", "gpr_exhaustive", "structure", "best_total"},
             {}};
  for (const auto& pt : rep.points)
    t.rows.push_back({pt.budget, pt.gpr_bf, pt.gpr_upa, pt.gpr_value,
                      structure_code(pt.gpr_structure), pt.gpr_best_total});
  FigureOutput out;
  out.tables.push_back(std::move(t));
  threshold_summary(rep, out.summary);
  return out;
}

}  // namespace detail

/// Computes a figure's tables in memory.
inline FigureOutput compute_figure(int id, const ExperimentConfig& cfg) {
  switch (id) {
    case 1: return detail::figure_1(cfg);
    case 2: return detail::figure_2(cfg);
    case 3: return detail::figure_3(cfg);
    case 4: return detail::figure_4(cfg);
    case 5: return detail::figure_5(cfg);
    case 6: return detail::figure_6(cfg);
    default: throw ConfigError("unknown figure id " + std::to_string(id) + " (expected 1-6)");
  }
}

/// Computes a figure and writes its CSV files and figN_manifest.txt under cfg.out.
inline ResultManifest run_figure(int id, const ExperimentConfig& cfg, FigureOutput* keep = nullptr) {
  const Stopwatch clock;
  FigureOutput fig = compute_figure(id, cfg);
  ResultManifest m;
  m.config = echo_config(cfg);
  m.config.emplace_back("figure", std::to_string(id));
  for (const auto& t : fig.tables) {
    const std::string bytes = t.render();
    write_file(cfg.out / t.name, bytes);
    m.digests.emplace_back(t.name, sha256_hex(bytes));
  }
  m.summary = fig.summary;
  m.wall_seconds = clock.seconds();
  write_file(cfg.out / ("fig" + std::to_string(id) + "_manifest.txt"), m.render());
  if (keep) *keep = std::move(fig);
  return m;
}

}  // namespace mimoee::cli
