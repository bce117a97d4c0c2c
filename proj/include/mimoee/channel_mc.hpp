#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mimoee/core.hpp"
#include "mimoee/philox.hpp"

namespace mimoee {

struct McConfig {
  std::uint64_t seed = 1;
  long long trials = 100000;
  // Worker threads; 0 means hardware concurrency. Never affects results.
  unsigned threads = 0;

  void validate() const {
    if (trials < 1) throw NonPositiveField("trials");
  }
};

namespace detail {

inline unsigned worker_count(unsigned requested, long long work) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (work < 4096) n = 1;
  return static_cast<unsigned>(std::min<long long>(n, std::max<long long>(work, 1)));
}

// Runs fn(begin, end) over a static partition of [0, n). fn must only touch
// state owned by its own slice.
template <typename Fn>
void parallel_chunks(long long n, unsigned threads, Fn&& fn) {
  const unsigned workers = worker_count(threads, n);
  if (workers <= 1) {
    fn(0LL, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const long long step = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const long long begin = std::min(n, w * step);
    const long long end = std::min(n, begin + step);
    if (begin < end) pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

// log det of a Hermitian positive definite matrix via Cholesky.
inline double logdet_hpd(const Eigen::MatrixXcd& m) {
  Eigen::LLT<Eigen::MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success) throw EvaluationFailure("Cholesky failed in log-det");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::log(llt.matrixL()(i, i).real());
  return 2.0 * acc;
}

}  // namespace detail

/// Draws H for one trial. Entry (i, j) uses counter index j * n_r + i, so the
/// matrix depends only on (seed, trial_index, n_t, n_r).
inline ChannelSample sample_channel(const SystemParams& params, std::uint64_t seed,
                                    std::uint64_t trial_index) {
  ChannelSample s{Eigen::MatrixXcd(params.n_r(), params.n_t())};
  for (int j = 0; j < params.n_t(); ++j)
    for (int i = 0; i < params.n_r(); ++i)
      s.h(i, j) =
          complex_gaussian(seed, trial_index, static_cast<std::uint32_t>(j * params.n_r() + i));
  return s;
}

/// log2 |I + rho H Diag(p) H^H| in bits per channel use. Works in whichever
/// of the n_r x n_r or n_t x n_t forms is smaller (Sylvester's identity).
inline double mutual_information(const ChannelSample& h, const PowerAllocation& alloc,
                                 const SystemParams& params) {
  if (h.n_t() != params.n_t() || h.n_r() != params.n_r() ||
      alloc.size() != static_cast<std::size_t>(params.n_t()))
    throw DimensionMismatch("mutual_information: channel/allocation/params dimensions differ");
  if (alloc.total() == 0.0) return 0.0;

  const double rho = params.rho();
  Eigen::VectorXd scale(params.n_t());
  for (int j = 0; j < params.n_t(); ++j) scale(j) = std::sqrt(rho * alloc[j]);
  // G = sqrt(rho) H Diag(sqrt(p)).
  const Eigen::MatrixXcd g = h.h * scale.asDiagonal();
  Eigen::MatrixXcd m;
  if (params.n_r() <= params.n_t()) {
    m = Eigen::MatrixXcd::Identity(params.n_r(), params.n_r());
    m.noalias() += g * g.adjoint();
  } else {
    m = Eigen::MatrixXcd::Identity(params.n_t(), params.n_t());
    m.noalias() += g.adjoint() * g;
  }
  return std::max(0.0, detail::logdet_hpd(m) * kLog2E);
}

/// Outage counter over a block of trials. Merging is plain addition, so any
/// partition of [0, N) yields the same totals.
struct OutageCounter {
  long long outages = 0;
  long long trials = 0;

  OutageCounter& operator+=(const OutageCounter& o) {
    outages += o.outages;
    trials += o.trials;
    return *this;
  }
  friend OutageCounter operator+(OutageCounter a, const OutageCounter& b) { return a += b; }
  friend bool operator==(const OutageCounter&, const OutageCounter&) = default;

  McEstimate estimate() const {
    const double m = trials > 0 ? static_cast<double>(outages) / trials : 1.0;
    return {m, trials > 0 ? std::sqrt(m * (1.0 - m) / trials) : 0.0, trials};
  }
};

/// Counts outages over trials [begin, end).
inline OutageCounter count_outages(const PowerAllocation& alloc, const SystemParams& params,
                                   std::uint64_t seed, long long begin, long long end) {
  OutageCounter c;
  for (long long t = begin; t < end; ++t) {
    const auto h = sample_channel(params, seed, static_cast<std::uint64_t>(t));
    if (mutual_information(h, alloc, params) < params.rate()) ++c.outages;
    ++c.trials;
  }
  return c;
}

inline McEstimate outage_probability_mc(const PowerAllocation& alloc, const SystemParams& params,
                                        const McConfig& cfg) {
  cfg.validate();
  if (alloc.size() != static_cast<std::size_t>(params.n_t()))
    throw DimensionMismatch("outage_probability_mc: allocation length != n_t");
  if (alloc.total() == 0.0) return {1.0, 0.0, cfg.trials};

  const unsigned workers = detail::worker_count(cfg.threads, cfg.trials);
  std::vector<OutageCounter> partial(workers);
  const long long step = (cfg.trials + workers - 1) / workers;
  detail::parallel_chunks(cfg.trials, workers, [&](long long begin, long long end) {
    partial[static_cast<std::size_t>(begin / step)] =
        count_outages(alloc, params, cfg.seed, begin, end);
  });
  OutageCounter total;
  for (const auto& c : partial) total += c;
  return total.estimate();
}

/// Gamma = R (1 - P_out) / Tr(D) with the outage estimated by Monte Carlo.
inline McEstimate gpr_mc(const PowerAllocation& alloc, const SystemParams& params,
                         const McConfig& cfg) {
  const double total = alloc.total();
  if (total <= 0.0) throw ZeroPower();
  const McEstimate out = outage_probability_mc(alloc, params, cfg);
  const double scale = params.rate() / total;
  return {scale * (1.0 - out.mean), scale * out.std_error, out.trials};
}

/// Fixed set of channel draws for sweeping many allocations with common
/// random numbers. Each trial keeps its Gram matrix H^H H; for a direction f
/// on the simplex, the mutual information along t f is increasing in t, so
/// every trial has a threshold total power t_k above which it is not in
/// outage. Success at total t is the fraction of thresholds <= t.
class ChannelEnsemble {
 public:
  ChannelEnsemble(const SystemParams& params, const McConfig& cfg)
      : params_(params), cfg_(cfg), gram_(static_cast<std::size_t>(cfg.trials)) {
    cfg.validate();
    detail::parallel_chunks(cfg.trials, cfg.threads, [&](long long begin, long long end) {
      for (long long t = begin; t < end; ++t) {
        const auto s = sample_channel(params_, cfg_.seed, static_cast<std::uint64_t>(t));
        gram_[static_cast<std::size_t>(t)] = s.h.adjoint() * s.h;
      }
    });
  }

  const SystemParams& params() const noexcept { return params_; }
  long long trials() const noexcept { return cfg_.trials; }

  /// Sorted per-trial threshold totals for direction `fractions` (nonnegative,
  /// any positive scale; normalized internally to sum 1).
  std::vector<double> thresholds(std::span<const double> fractions) const {
    const int n = params_.n_t();
    if (fractions.size() != static_cast<std::size_t>(n))
      throw DimensionMismatch("ChannelEnsemble::thresholds: direction length != n_t");
    double sum = 0.0;
    for (double f : fractions) sum += f;
    if (!(sum > 0.0)) throw ZeroPower();
    Eigen::VectorXd root(n);
    for (int i = 0; i < n; ++i) root(i) = std::sqrt(fractions[static_cast<std::size_t>(i)] / sum);

    std::vector<double> out(gram_.size());
    detail::parallel_chunks(static_cast<long long>(gram_.size()), cfg_.threads,
                            [&](long long begin, long long end) {
                              for (long long k = begin; k < end; ++k)
                                out[static_cast<std::size_t>(k)] =
                                    threshold_one(gram_[static_cast<std::size_t>(k)], root);
                            });
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Success probability estimate at total power `total` along a direction
  /// whose sorted thresholds are given.
  static McEstimate success_at(const std::vector<double>& sorted_thresholds, double total) {
    const auto n = static_cast<long long>(sorted_thresholds.size());
    const auto ok = static_cast<long long>(
        std::upper_bound(sorted_thresholds.begin(), sorted_thresholds.end(), total) -
        sorted_thresholds.begin());
    const double m = static_cast<double>(ok) / n;
    return {m, std::sqrt(m * (1.0 - m) / n), n};
  }

  /// Success probability of one allocation (uses its own total).
  McEstimate success_probability(const PowerAllocation& alloc) const {
    const double total = alloc.total();
    if (total == 0.0) return {0.0, 0.0, cfg_.trials};
    return success_at(thresholds(alloc.powers()), total);
  }

 private:
  double threshold_one(const Eigen::MatrixXcd& gram, const Eigen::VectorXd& root) const {
    const double target = params_.rate() * kLn2;  // nats
    const double rho = params_.rho();
    const int n = params_.n_t();
    if (n == 1) {
      const double a = rho * gram(0, 0).real();
      return a > 0.0 ? std::expm1(target) / a : std::numeric_limits<double>::infinity();
    }
    if (n == 2) {
      // |I + t A| = 1 + t tr(A) + t^2 det(A) with A = rho F^1/2 G F^1/2.
      const double f0 = root(0) * root(0);
      const double f1 = root(1) * root(1);
      const double tr = rho * (f0 * gram(0, 0).real() + f1 * gram(1, 1).real());
      const double det = rho * rho * f0 * f1 *
                         std::max(0.0, gram(0, 0).real() * gram(1, 1).real() -
                                           std::norm(gram(0, 1)));
      const double k = std::expm1(target);  // 2^R - 1
      if (tr <= 0.0) return std::numeric_limits<double>::infinity();
      if (det <= 1e-300 * tr * tr) return k / tr;
      // Positive root of det t^2 + tr t - k = 0, cancellation-free form.
      return 2.0 * k / (tr + std::sqrt(tr * tr + 4.0 * det * k));
    }
    const Eigen::MatrixXcd a = rho * (root.asDiagonal() * gram * root.asDiagonal());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd mu = es.eigenvalues().cwiseMax(0.0);
    const double slope0 = mu.sum();
    if (slope0 <= 0.0) return std::numeric_limits<double>::infinity();
    // h(t) = sum log(1 + t mu) - target is concave increasing; Newton from
    // the left converges monotonically.
    double t = 0.0;
    for (int it = 0; it < 200; ++it) {
      double h = -target;
      double dh = 0.0;
      for (Eigen::Index i = 0; i < mu.size(); ++i) {
        h += std::log1p(t * mu(i));
        dh += mu(i) / (1.0 + t * mu(i));
      }
      const double next = t - h / dh;
      if (std::abs(next - t) <= 1e-15 * std::abs(next)) return next;
      t = next;
    }
    return t;
  }

  SystemParams params_;
  McConfig cfg_;
  std::vector<Eigen::MatrixXcd> gram_;
};

/// Monte Carlo Gamma_UPA(p) on a grid of total powers, sharing channel draws
/// across all grid points.
inline std::vector<McEstimate> upa_gpr_curve_mc(const ChannelEnsemble& ensemble,
                                                std::span<const double> powers) {
  const int n = ensemble.params().n_t();
  const std::vector<double> dir(static_cast<std::size_t>(n), 1.0);
  const auto th = ensemble.thresholds(dir);
  std::vector<McEstimate> out;
  out.reserve(powers.size());
  const double r = ensemble.params().rate();
  for (double p : powers) {
    if (p <= 0.0) {
      out.push_back({0.0, 0.0, ensemble.trials()});
      continue;
    }
    const auto s = ChannelEnsemble::success_at(th, p);
    out.push_back({r * s.mean / p, r * s.std_error / p, s.trials});
  }
  return out;
}

}  // namespace mimoee
