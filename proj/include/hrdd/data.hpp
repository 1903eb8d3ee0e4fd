#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hrdd {

enum class OutcomeKind { continuous, binary };
enum class KernelKind { triangular, window };

struct GroupData {
  std::vector<double> y;
  std::vector<double> x;
  std::vector<std::uint8_t> w;  // treatment indicator, I(x >= c)

  std::size_t size() const { return y.size(); }
};

struct Dataset {
  std::vector<GroupData> groups;
  double c = 0.0;  // common threshold; per-group thresholds are out of scope
  OutcomeKind outcome_kind = OutcomeKind::continuous;

  std::size_t n_groups() const { return groups.size(); }
  std::size_t n_total() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }
};

struct Hyperparams {
  double a_m = 0.0;       // prior mean of the hyper-means
  double b_m = 1e3;       // prior variance of the hyper-means
  double a_psi = 1.0;
  double b_psi = 1.0;
  double a_omega = 1.0;
  double b_omega = 1.0;
  double a_w = 0.5;
  double b_w = 0.5;
  double a_pi = 0.5;
  double b_pi = 0.5;
  double nu = 0.5;        // robust-mixture tail index
  double epsilon = 0.01;  // spike variance factor
  int q = 1;              // local polynomial order; p = 2q + 1
  KernelKind kernel = KernelKind::triangular;
  bool use_spike_slab = true;
  bool use_robust_mixture = true;

  int p() const { return 2 * q + 1; }
};

struct ChainState {
  std::vector<double> tau;                  // G
  std::vector<std::vector<double>> beta;    // G x p
  std::vector<std::uint8_t> s;              // spike indicators, G
  double pi = 0.5;
  double omega = 1.0;                       // continuous model only
  std::vector<std::vector<double>> u;       // per observation; 1 when r = 0
  std::vector<std::vector<std::uint8_t>> r;
  double w_mix = 0.5;
  double psi_tau = 1.0;
  std::vector<double> psi_beta;             // p
  double m_tau = 0.0;
  std::vector<double> m_beta;               // p
  std::vector<std::vector<double>> omega_pg;  // binary model only
};

// Per-draw group-level snapshot kept after burn-in.  Per-observation latents
// (u, r, omega_pg) are deliberately not retained: the reported summaries are
// functions of tau/beta alone, and the ragged arrays would dominate memory
// at full problem sizes.
struct DrawSnapshot {
  std::vector<double> tau;                // G
  std::vector<std::vector<double>> beta;  // G x p
  std::vector<std::uint8_t> s;
  double pi = 0.0;
  double omega = 0.0;
  double w_mix = 0.0;
  double psi_tau = 0.0;
  std::vector<double> psi_beta;
  double m_tau = 0.0;
  std::vector<double> m_beta;
};

struct GroupSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

struct PosteriorDraws {
  std::vector<DrawSnapshot> draws;       // post burn-in
  std::vector<std::vector<double>> effect;  // per draw: tau_g (continuous) or tau*_g (binary)
  std::vector<GroupSummary> summary;     // per group, over `effect`
  std::vector<std::string> warnings;
};

void validate(const Dataset& d);

// Empirical quantile with linear interpolation between order statistics.
// `sorted` must be ascending and nonempty; prob in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double prob);

// Recompute per-group summaries (mean, sd, 2.5%/97.5% quantiles) from the
// retained effect draws.
std::vector<GroupSummary> summarize_effects(
    const std::vector<std::vector<double>>& effect_draws);

}  // namespace hrdd
