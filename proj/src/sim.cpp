#include "hrdd/sim.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "hrdd/bandwidth.hpp"
#include "hrdd/baseline.hpp"
#include "hrdd/errors.hpp"
#include "hrdd/parallel.hpp"

namespace hrdd {

namespace {

void validate_config(const DGPConfig& cfg) {
  if (cfg.G == 0 || cfg.G % 4 != 0)
    throw DomainError("DGP: G must be a positive multiple of 4");
  for (std::size_t n : cfg.cluster_sizes)
    if (n == 0) throw DomainError("DGP: cluster sizes must be positive");
}

double error_survival(double t, ErrorScenario s) {
  switch (s) {
    case ErrorScenario::A:
      return 0.5 * std::erfc(t / std::numbers::sqrt2);
    case ErrorScenario::B: {
      const double u = t / std::sqrt(3.0);
      const double cdf =
          0.5 + (u / (1.0 + u * u) + std::atan(u)) / std::numbers::pi;
      return 1.0 - cdf;
    }
    case ErrorScenario::C: {
      // shifted Ga(4, 2): survival at t is the Ga(4,2) upper tail at t + 2
      const double x = 2.0 * (t + 2.0);
      if (x <= 0.0) return 1.0;
      return std::exp(-x) *
             (1.0 + x + 0.5 * x * x + x * x * x / 6.0);
    }
  }
  return 0.0;
}

}  // namespace

double draw_tau(TauScenario s, RngStream& rng) {
  switch (s) {
    case TauScenario::I:
      return rng.gamma_rate(3.0, 1.0) - 3.0;
    case TauScenario::II: {
      const double u = rng.uniform01();
      if (u < 0.4) return -2.0;
      if (u < 0.6) return 0.0;
      return 2.0;
    }
    case TauScenario::III: {
      const double u = rng.uniform01();
      if (u < 0.4) return rng.uniform(-3.0, -1.0);
      if (u < 0.6) return 0.0;
      return rng.uniform(1.0, 3.0);
    }
  }
  return 0.0;
}

double draw_error(ErrorScenario s, RngStream& rng) {
  switch (s) {
    case ErrorScenario::A:
      return rng.normal();
    case ErrorScenario::B:
      return rng.student_t(3.0);
    case ErrorScenario::C:
      return rng.gamma_rate(4.0, 2.0) - 2.0;
  }
  return 0.0;
}

double true_binary_effect(double tau, double sigma, ErrorScenario s) {
  return error_survival(-tau / sigma, s) - error_survival(0.0, s);
}

GeneratedData generate_dataset(const DGPConfig& cfg) {
  validate_config(cfg);
  GeneratedData out;
  out.data.c = 0.0;
  out.data.outcome_kind = cfg.outcome;

  const std::size_t per_cluster = cfg.G / 4;
  RngStream root(cfg.seed, 900);
  for (std::size_t g = 0; g < cfg.G; ++g) {
    RngStream rng = root.fork(g);
    const std::size_t n = cfg.cluster_sizes[g / per_cluster];

    const double tau = draw_tau(cfg.tau_scenario, rng);
    const double b1l = rng.uniform(0.4, 1.4);
    const double b1r = rng.uniform(0.4, 1.4);
    const double b2l = rng.uniform(3.0, 7.0);
    const double b2r = rng.uniform(5.0, 9.0);
    const double b3l = rng.uniform(9.0, 11.0);
    const double b3r = rng.uniform(3.0, 5.0);
    const double sigma = std::sqrt(rng.uniform(0.5, 1.2));

    GroupData gd;
    gd.x.reserve(n);
    gd.y.reserve(n);
    gd.w.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = 2.0 * rng.beta(2.0, 4.0) - 1.0;
      const double x2 = x * x, x3 = x2 * x;
      const double mu = x <= 0.0 ? b1l * x + b2l * x2 + b3l * x3
                                 : tau + b1r * x + b2r * x2 + b3r * x3;
      const double latent = mu + sigma * draw_error(cfg.error_scenario, rng);
      gd.x.push_back(x);
      gd.w.push_back(static_cast<std::uint8_t>(x >= 0.0));
      gd.y.push_back(cfg.outcome == OutcomeKind::binary
                         ? (latent >= 0.0 ? 1.0 : 0.0)
                         : latent);
    }
    out.data.groups.push_back(std::move(gd));
    out.latent_tau.push_back(tau);
    out.true_effect.push_back(cfg.outcome == OutcomeKind::binary
                                  ? true_binary_effect(tau, sigma,
                                                       cfg.error_scenario)
                                  : tau);
  }
  return out;
}

std::string method_name(MethodKind m) {
  switch (m) {
    case MethodKind::hrdd_global:
      return "hrdd-g";
    case MethodKind::hrdd_local:
      return "hrdd-l";
    case MethodKind::srdd:
      return "srdd";
    case MethodKind::pooled:
      return "pooled";
  }
  return "unknown";
}

Metrics compute_metrics(const std::vector<double>& estimates,
                        const std::vector<double>& truths,
                        const std::vector<std::pair<double, double>>& intervals) {
  if (estimates.size() != truths.size() || estimates.size() != intervals.size())
    throw ValidationError(ValidationError::Kind::LengthMismatch,
                          "compute_metrics: misaligned inputs");
  Metrics m;
  m.n_cells = estimates.size();
  if (m.n_cells == 0) return m;

  double sse = 0.0, covered = 0.0, len = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto& [lo, hi] = intervals[i];
    if (!std::isfinite(estimates[i]) || !std::isfinite(truths[i]) ||
        !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
      throw DomainError("compute_metrics: estimates and intervals must be "
                        "finite with hi >= lo");
    const double d = estimates[i] - truths[i];
    sse += d * d;
    covered += (lo <= truths[i] && truths[i] <= hi) ? 1.0 : 0.0;
    len += hi - lo;
  }
  const double n = static_cast<double>(m.n_cells);
  m.rmse = std::sqrt(sse / n);
  m.cp = covered / n;
  m.al = len / n;
  return m;
}

namespace {

struct CellResult {
  bool ok = false;
  double est = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

std::uint64_t method_tag(MethodKind m) {
  switch (m) {
    case MethodKind::hrdd_global:
      return 0x11;
    case MethodKind::hrdd_local:
      return 0x22;
    case MethodKind::srdd:
      return 0x33;
    case MethodKind::pooled:
      return 0x44;
  }
  return 0x55;
}

std::vector<CellResult> summary_cells(const PosteriorDraws& draws) {
  std::vector<CellResult> cells;
  cells.reserve(draws.summary.size());
  for (const auto& s : draws.summary)
    cells.push_back({true, s.mean, s.q025, s.q975});
  return cells;
}

std::vector<CellResult> fit_method(MethodKind m, const GeneratedData& gen,
                                   const SimOptions& opts,
                                   std::uint64_t chain_seed) {
  const Dataset& d = gen.data;
  const std::size_t G = d.groups.size();
  std::vector<CellResult> cells(G);

  switch (m) {
    case MethodKind::srdd: {
      for (std::size_t g = 0; g < G; ++g) {
        try {
          const double h = baseline_bandwidth(d.groups[g], d.c);
          const FreqEstimate fe =
              fit_separate_wls(d.groups[g], d.c, h, KernelKind::triangular, 1);
          cells[g] = {true, fe.tau_hat, fe.ci_low, fe.ci_high};
        } catch (const DomainError&) {  // this group is excluded
        } catch (const NumericalError&) {
        } catch (const ValidationError&) {
        }
      }
      return cells;
    }
    case MethodKind::pooled: {
      GroupData pooled;
      for (const auto& g : d.groups) {
        pooled.x.insert(pooled.x.end(), g.x.begin(), g.x.end());
        pooled.y.insert(pooled.y.end(), g.y.begin(), g.y.end());
        pooled.w.insert(pooled.w.end(), g.w.begin(), g.w.end());
      }
      const double h = baseline_bandwidth(pooled, d.c);
      const FreqEstimate fe = fit_pooled(d, d.c, h, KernelKind::triangular, 1);
      for (auto& c : cells) c = {true, fe.tau_hat, fe.ci_low, fe.ci_high};
      return cells;
    }
    case MethodKind::hrdd_global:
    case MethodKind::hrdd_local: {
      const bool global = m == MethodKind::hrdd_global;
      if (d.outcome_kind == OutcomeKind::binary) {
        BinaryModelSpec spec;
        spec.dataset = d;
        spec.n_iter = opts.n_iter;
        spec.n_burn = opts.n_burn;
        spec.seed = chain_seed;
        BandwidthPlan plan;
        plan.candidates = build_candidate_grid(d, spec.hyper, opts.grid_size);
        plan.batch_len = opts.batch_len;
        plan.warmup_len = opts.warmup_len;
        auto res = global ? select_global_bandwidth(spec, plan)
                          : select_local_bandwidths(spec, plan);
        return summary_cells(res.draws);
      }
      ContinuousModelSpec spec;
      spec.dataset = d;
      spec.hyper.use_spike_slab = false;  // plain normal random effects
      spec.n_iter = opts.n_iter;
      spec.n_burn = opts.n_burn;
      spec.seed = chain_seed;
      BandwidthPlan plan;
      plan.candidates = build_candidate_grid(d, spec.hyper, opts.grid_size);
      plan.batch_len = opts.batch_len;
      plan.warmup_len = opts.warmup_len;
      auto res = global ? select_global_bandwidth(spec, plan)
                        : select_local_bandwidths(spec, plan);
      return summary_cells(res.draws);
    }
  }
  return cells;
}

}  // namespace

MetricsReport run_replications(const DGPConfig& cfg,
                               const std::vector<MethodKind>& methods, int R,
                               const SimOptions& opts) {
  validate_config(cfg);
  if (R < 1) throw DomainError("run_replications: R must be at least 1");
  if (methods.empty())
    throw DomainError("run_replications: no methods requested");
  if (opts.n_burn < 0 || opts.n_iter <= opts.n_burn)
    throw DomainError("run_replications: need n_iter > n_burn >= 0");

  const std::size_t M = methods.size();
  const std::size_t G = cfg.G;
  // results[m][r] is written only by replication r: deterministic under any
  // thread count
  std::vector<std::vector<std::vector<CellResult>>> results(
      M, std::vector<std::vector<CellResult>>(static_cast<std::size_t>(R)));
  std::vector<std::vector<double>> truths(static_cast<std::size_t>(R));

  parallel_for(static_cast<std::size_t>(R), opts.n_threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = mix64(cfg.seed ^ mix64(0x5EED + r));
    DGPConfig rep_cfg = cfg;
    rep_cfg.seed = rep_seed;
    const GeneratedData gen = generate_dataset(rep_cfg);
    truths[r] = gen.true_effect;
    for (std::size_t mi = 0; mi < M; ++mi) {
      const std::uint64_t chain_seed =
          mix64(rep_seed ^ (method_tag(methods[mi]) << 8));
      try {
        results[mi][r] = fit_method(methods[mi], gen, opts, chain_seed);
      } catch (const DomainError&) {  // whole replication excluded
        results[mi][r].assign(G, CellResult{});
      } catch (const NumericalError&) {
        results[mi][r].assign(G, CellResult{});
      } catch (const ValidationError&) {
        results[mi][r].assign(G, CellResult{});
      }
    }
  });

  MetricsReport report;
  report.cfg = cfg;
  report.R = R;
  for (std::size_t mi = 0; mi < M; ++mi) {
    std::vector<double> est, tru;
    std::vector<std::pair<double, double>> ivs;
    std::size_t failures = 0;
    for (int r = 0; r < R; ++r) {
      const auto& cells = results[mi][static_cast<std::size_t>(r)];
      for (std::size_t g = 0; g < G; ++g) {
        if (!cells[g].ok) {
          ++failures;
          continue;
        }
        est.push_back(cells[g].est);
        tru.push_back(truths[static_cast<std::size_t>(r)][g]);
        ivs.emplace_back(cells[g].lo, cells[g].hi);
      }
    }
    MethodMetrics row;
    row.method = methods[mi];
    row.metrics = compute_metrics(est, tru, ivs);
    row.n_failures = failures;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace hrdd
