#pragma once

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mimoee/cli/experiment.hpp"
#include "mimoee/cli/figures.hpp"

namespace mimoee::cli {

// ---------------------------------------------------------------------------
// Queries.

inline Defaults query_defaults(const std::string& kind) {
  Defaults d;
  d.n_t = 2;
  d.n_r = 1;
  d.trials = 100000;
  if (kind == "miso-opt" || kind == "thresholds") {
    d.n_t = 4;
    d.rate = 3.0;
  } else if (kind == "asymptotic") {
    d.n_t = 2;
    d.n_r = 2;
  }
  return d;
}

namespace detail {

inline std::string yes_no(bool b) { return b ? "true" : "false"; }

inline double required_power(const ExperimentConfig& cfg) {
  if (!cfg.has("p")) throw ConfigError("this query needs --p <total power>");
  const double p = cfg.get<double>("p", 0.0);
  if (!(p > 0.0)) throw ConfigError("--p must be positive");
  return p;
}

inline std::string regime_name(const ExperimentConfig& cfg) {
  const auto r = cfg.get<std::string>("regime", "b");
  if (r != "a" && r != "b" && r != "c") throw ConfigError("--regime must be a, b or c");
  return r;
}

// UPA success probability at total power p: closed form where one exists.
inline std::pair<McEstimate, std::string> upa_success(const ExperimentConfig& cfg, double p) {
  const auto& params = cfg.params;
  const auto alloc = PowerAllocation::uniform(params.n_t(), p);
  if (params.n_r() == 1) return {{miso_success_probability(alloc, params), 0.0, 0}, "closed_form"};
  if (params.n_t() == 1)
    return {{erlang_survival(params.n_r(), params.c() / p), 0.0, 0}, "closed_form"};
  const auto out = outage_probability_mc(alloc, params, cfg.mc());
  return {{1.0 - out.mean, out.std_error, out.trials}, "monte_carlo"};
}

}  // namespace detail

/// One key=value record for a query kind.
inline Record run_query(const std::string& kind, const ExperimentConfig& cfg) {
  const auto& params = cfg.params;
  Record r;
  auto put = [&r](const std::string& k, double v) { r.emplace_back(k, format_shortest(v)); };
  if (kind == "nu") {
    const int n = cfg.get<int>("n", params.n_t());
    if (n < 1) throw ConfigError("--n must be positive");
    put("nu", solve_nu(n));
  } else if (kind == "thresholds") {
    const int n_t = cfg.get<int>("n", params.n_t());
    if (n_t < 2) throw ConfigError("thresholds need at least 2 antennas");
    const auto t = solve_c_thresholds(n_t);
    for (int l = 1; l < n_t; ++l) put("c_" + std::to_string(l), t.at(l));
  } else if (kind == "miso-opt") {
    if (params.n_r() != 1) throw ConfigError("miso-opt needs nr = 1");
    const auto s = miso_optimal_precoder(params);
    r.emplace_back("active_antennas", std::to_string(s.active_antennas));
    put("per_antenna_power", s.per_antenna_power);
    put("total_power", s.total_power());
    r.emplace_back("saturated", detail::yes_no(s.saturated));
    put("gamma", miso_optimal_gpr(params));
  } else if (kind == "gpr" || kind == "outage") {
    const double p = detail::required_power(cfg);
    const auto [s, method] = detail::upa_success(cfg, p);
    if (kind == "gpr") {
      put("gamma", params.rate() * s.mean / p);
      put("std_error", params.rate() * s.std_error / p);
    } else {
      put("outage", 1.0 - s.mean);
      put("std_error", s.std_error);
    }
    r.emplace_back("method", method);
  } else if (kind == "asymptotic") {
    const auto regime = detail::regime_name(cfg);
    r.emplace_back("regime", regime);
    const bool have_p = cfg.has("p");
    const double p = have_p ? detail::required_power(cfg) : 0.0;
    if (regime == "a") {
      put("inflection", inflection_regime_a(params));
      if (have_p) put("goodput", goodput_regime_a(p, params));
    } else if (regime == "b") {
      const auto lim = regime_b_limits(params);
      put("p_star", lim.p_star);
      put("gamma_star", lim.gamma_star);
      if (have_p) put("goodput", goodput_regime_b(p, params));
    } else {
      const double beta = cfg.get<double>("beta", static_cast<double>(params.n_r()) / params.n_t());
      put("beta", beta);
      put("inflection", inflection_regime_c(params, beta));
      if (have_p) {
        const auto t = regime_c_terms(p, params.rho(), beta);
        put("mu", t.mu);
        put("variance", t.variance);
        put("goodput", goodput_regime_c(p, params, beta));
      }
    }
  } else {
    throw ConfigError("unknown query kind '" + kind +
                      "' (expected gpr, outage, miso-opt, nu, thresholds, asymptotic)");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Verification suites.

struct VerifyResult {
  bool pass = false;
  Record record;
  std::string report;
};

inline Defaults verify_defaults(const std::string& suite) {
  Defaults d;
  if (suite == "conjecture1") {
    d = figure_defaults(5);
  } else if (suite == "conjecture2") {
    d.n_t = 4;
    d.n_r = 4;
    d.grid_points = 200;
  } else if (suite == "schur") {
    d.n_t = 2;
    d.n_r = 1;
  } else if (suite == "appendixA") {
    d.n_t = 4;
    d.n_r = 4;
  } else if (suite == "tiso") {
    d.n_t = 2;
    d.n_r = 1;
    d.rate = 3.0;
  }
  return d;
}

namespace detail {

inline VerifyResult verify_conjecture1(const ExperimentConfig& cfg) {
  const auto rep = structure_scan(cfg);
  VerifyResult v;
  v.pass = rep.violations.empty() && std::isfinite(rep.threshold_estimate);
  std::ostringstream os;
  os << "budget,gpr_structure,outage_structure,gpr_value,success_value\n";
  for (const auto& p : rep.points)
    os << format_shortest(p.budget) << ',' << to_string(p.gpr_structure) << ','
       << to_string(p.outage_structure) << ',' << format_shortest(p.gpr_value) << ','
       << format_shortest(p.success_value) << '\n';
  os << "regimes:\n";
  for (const auto& g : rep.regimes)
    os << "  [" << format_shortest(g.from) << ", " << format_shortest(g.to) << "] "
       << to_string(g.structure) << '\n';
  v.report = os.str();
  threshold_summary(rep, v.record);
  return v;
}

inline VerifyResult verify_conjecture2(const ExperimentConfig& cfg) {
  const int gp = static_cast<int>(cfg.grid_points);
  const auto grid = mimoee::detail::log_grid(cfg.params.p_max() * 1e-3, cfg.params.p_max(), gp);
  const auto c = upa_curve(cfg.params, cfg.mc(), grid, gp);
  GprCurve curve;
  for (std::size_t i = 0; i < grid.size(); ++i)
    curve.grid.push_back({grid[i], c.values[i].mean, c.values[i].std_error});
  const double sigmas = cfg.get<double>("noise_sigmas", 4.0);
  const double band = sigmas * curve.max_std_error();
  const auto rep = unimodality_check(curve, band);
  VerifyResult v;
  v.pass = rep.unimodal;
  v.record.emplace_back("noise_band", format_shortest(band));
  v.record.emplace_back("peaks", std::to_string(rep.peaks.size()));
  v.record.emplace_back("p_star", format_shortest(c.best.p_star));
  v.record.emplace_back("gamma_star", format_shortest(c.best.gamma_star));
  std::ostringstream os;
  os << "p,gamma,std_error\n";
  for (const auto& pt : curve.grid)
    os << format_shortest(pt.p) << ',' << format_shortest(pt.gamma) << ','
       << format_shortest(pt.std_error) << '\n';
  v.report = os.str();
  return v;
}

inline VerifyResult verify_schur(const ExperimentConfig& cfg) {
  VerifyResult v;
  v.pass = true;
  std::ostringstream os;
  const int resolution = cfg.get<int>("resolution", 16);
  const int levels = cfg.get<int>("levels", 8);
  for (auto [regime, rho_db] : {std::pair{SnrRegime::kLow, -10.0}, std::pair{SnrRegime::kHigh, 40.0}}) {
    const auto p = cfg.params.with_sigma2(sigma2_from_rho_db(rho_db));
    const SimplexGrid grid{p.n_t(), resolution, p.p_max(), levels};
    const auto s = schur_extreme_snr_check(p, regime, grid, cfg.mc());
    const std::string tag = regime == SnrRegime::kLow ? "low" : "high";
    v.pass = v.pass && s.pass;
    v.record.emplace_back(tag + ".rho_db", format_shortest(rho_db));
    v.record.emplace_back(tag + ".argmax", to_string(s.argmax));
    v.record.emplace_back(tag + ".pairs_checked", std::to_string(s.pairs_checked));
    v.record.emplace_back(tag + ".violations", std::to_string(s.violations));
    v.record.emplace_back(tag + ".closed_form", yes_no(s.closed_form));
    os << tag << " SNR slices:";
    for (auto st : s.slice_argmax) os << ' ' << to_string(st);
    os << '\n';
  }
  v.report = os.str();
  return v;
}

inline VerifyResult verify_appendix_a(const ExperimentConfig& cfg) {
  const long long samples = cfg.get<long long>("samples", 1000);
  const auto r = appendix_a_inequality_check(samples, cfg.params, cfg.mc());
  VerifyResult v;
  v.pass = r.pass;
  v.record.emplace_back("samples", std::to_string(r.samples));
  v.record.emplace_back("max_value", format_shortest(r.max_value));
  v.record.emplace_back("violations", std::to_string(r.violations.size()));
  std::ostringstream os;
  for (long long s : r.violations) os << "violation at sample " << s << '\n';
  v.report = os.str();
  return v;
}

inline VerifyResult verify_tiso(const ExperimentConfig& cfg) {
  VerifyResult v;
  try {
    const auto w = tiso_counterexample(cfg.params);
    v.pass = w.level_set_nonconvex;
    v.record.emplace_back("q", format_shortest(w.q));
    v.record.emplace_back("gamma_q_0", format_shortest(w.gamma_q));
    v.record.emplace_back("gamma_0_q", format_shortest(w.gamma_swapped));
    v.record.emplace_back("gamma_midpoint", format_shortest(w.gamma_midpoint));
    v.record.emplace_back("level_set_nonconvex", yes_no(w.level_set_nonconvex));
    v.report = "(q,0) and (0,q) lie in the upper-level set {Gamma >= " +
               format_shortest(w.gamma_q) + "}; their midpoint (q/2,q/2) has Gamma = " +
               format_shortest(w.gamma_midpoint) + "\n";
  } catch (const NoWitness& e) {
    v.pass = false;
    v.report = std::string("no witness: ") + e.what() + "\n";
  }
  return v;
}

}  // namespace detail

inline VerifyResult run_verify(const std::string& suite, const ExperimentConfig& cfg) {
  VerifyResult v;
  if (suite == "conjecture1") v = detail::verify_conjecture1(cfg);
  else if (suite == "conjecture2") v = detail::verify_conjecture2(cfg);
  else if (suite == "schur") v = detail::verify_schur(cfg);
  else if (suite == "appendixA") v = detail::verify_appendix_a(cfg);
  else if (suite == "tiso") v = detail::verify_tiso(cfg);
  else
    throw ConfigError("unknown verify suite '" + suite +
                      "' (expected conjecture1, conjecture2, schur, appendixA, tiso)");
  v.record.insert(v.record.begin(), {"result", v.pass ? "pass" : "fail"});
  v.record.insert(v.record.begin(), {"suite", suite});
  std::string text;
  for (const auto& [k, val] : v.record) text += k + "=" + val + "\n";
  text += "\n" + v.report;
  write_file(cfg.out / ("verify_" + suite + ".txt"), text);
  return v;
}

// ---------------------------------------------------------------------------
// Command-line front end.

/// Parses argv, runs one subcommand and returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-efficiency workbench for multi-antenna links"};
  app.require_subcommand(1);

  std::map<std::string, std::string> flags;
  std::string config_path;
  auto add_global = [&](CLI::App* sub) {
    for (const char* name : {"nt", "nr", "rho-db", "rate", "pmax", "seed", "trials",
                             "grid-points", "out", "n", "regime", "beta", "samples", "p",
                             "threads", "resolution", "levels"}) {
      const std::string key = name;
      sub->add_option_function<std::string>(
          "--" + key, [&flags, key](const std::string& v) { flags[key] = v; });
    }
    sub->add_option("--config", config_path, "key=value config file");
  };

  int figure_id = 0;
  std::string query_kind;
  std::string verify_suite;
  auto* fig = app.add_subcommand("figure", "reproduce the data behind a figure (1-6)");
  fig->add_option("id", figure_id)->required();
  add_global(fig);
  auto* query = app.add_subcommand("query", "print one key=value record");
  query->add_option("kind", query_kind)->required();
  add_global(query);
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", verify_suite)->required();
  add_global(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    Overrides cli_over;
    for (const auto& [k, v] : flags) set_override(cli_over, k, v);
    const Overrides file = config_path.empty() ? Overrides{} : parse_config_file(config_path);
    const Overrides merged = merge(cli_over, file);

    if (fig->parsed()) {
      const auto cfg = resolve("figure", merged, figure_defaults(figure_id));
      const auto m = run_figure(figure_id, cfg);
      for (const auto& [k, v] : m.summary) out << k << '=' << v << '\n';
      for (const auto& [f, d] : m.digests) out << "wrote " << (cfg.out / f).string() << '\n';
      return kExitOk;
    }
    if (query->parsed()) {
      const auto cfg = resolve("query", merged, query_defaults(query_kind));
      for (const auto& [k, v] : run_query(query_kind, cfg)) out << k << '=' << v << '\n';
      return kExitOk;
    }
    const auto cfg = resolve("verify", merged, verify_defaults(verify_suite));
    const auto v = run_verify(verify_suite, cfg);
    for (const auto& [k, val] : v.record) out << k << '=' << val << '\n';
    return v.pass ? kExitOk : kExitVerifyFailed;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NonPositiveField& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace mimoee::cli
