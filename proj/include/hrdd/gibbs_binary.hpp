#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrdd/data.hpp"
#include "hrdd/design.hpp"
#include "hrdd/params.hpp"
#include "hrdd/rng.hpp"

namespace hrdd {

// Binary-response defaults: the spike-and-slab reuse is opt-in here.
inline Hyperparams binary_default_hyper() {
  Hyperparams h;
  h.use_spike_slab = false;
  h.use_robust_mixture = false;
  return h;
}

struct BinaryModelSpec {
  Dataset dataset;
  Hyperparams hyper = binary_default_hyper();
  std::vector<double> h;  // one bandwidth per group
  int n_iter = 1500;
  int n_burn = 500;
  std::uint64_t seed = 1;
};

// Subgroup effect on the probability scale:
// logistic(tau + beta1) - logistic(beta1), beta1 = group intercept.
double tau_star_transform(double tau, double beta1);

// Gibbs sampler for the binary-response logistic pseudo-model with
// Polya-gamma augmentation.  Sweep order: {omega_ig} -> {tau_g} ->
// [{s_g, pi} if enabled] -> {beta_g} -> psi's -> m's.  RNG streams fork
// per (seed, sweep, block, group) exactly as in the continuous sampler.
class BinarySampler {
 public:
  BinarySampler(const Dataset& data, const Hyperparams& hyper,
                std::vector<double> h, std::uint64_t seed);

  std::size_t n_groups() const { return designs_.size(); }
  int p() const { return hyper_.p(); }
  const GroupDesign& design(std::size_t g) const { return designs_[g]; }
  const std::vector<double>& y(std::size_t g) const { return y_[g]; }
  const std::vector<double>& w(std::size_t g) const { return w_[g]; }
  const std::vector<double>& kappa(std::size_t g) const { return kappa_[g]; }
  const Hyperparams& hyper() const { return hyper_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Rebuild designs at new bandwidths mid-chain; kappa = k (y - 1/2) is
  // recomputed and omega_ig zeroed for observations without support.
  void set_bandwidths(ChainState& state, const std::vector<double>& h);

  ChainState init_state() const;

  // --- full-conditional parameters (pure; exposed for oracle tests) ---
  NormalParams tau_conditional(std::size_t g, const ChainState& s) const;
  MvnParams beta_conditional(std::size_t g, const ChainState& s) const;
  double spike_probability(std::size_t g, const ChainState& s) const;
  BetaParams pi_conditional(const ChainState& s) const;
  InvGammaParams psi_tau_conditional(const ChainState& s) const;
  InvGammaParams psi_beta_conditional(int k, const ChainState& s) const;
  NormalParams m_tau_conditional(const ChainState& s) const;
  NormalParams m_beta_conditional(int k, const ChainState& s) const;

  // --- block updates ---
  void update_pg_latents(ChainState& s, std::uint64_t sweep_idx);
  void update_taus(ChainState& s, std::uint64_t sweep_idx);
  void update_spikes(ChainState& s, std::uint64_t sweep_idx);
  void update_betas(ChainState& s, std::uint64_t sweep_idx);
  void update_hyper_variances(ChainState& s, std::uint64_t sweep_idx);
  void update_hyper_means(ChainState& s, std::uint64_t sweep_idx);

  void sweep(ChainState& s, std::uint64_t sweep_idx);

  // linear predictor mu = tau w + Z beta for one group into `out`
  void linear_predictor(std::size_t g, const ChainState& s,
                        std::vector<double>& out) const;

 private:
  RngStream block_stream(std::uint64_t sweep_idx, std::uint64_t block,
                         std::uint64_t group) const;

  Hyperparams hyper_;
  double c_;
  std::uint64_t seed_;
  std::vector<GroupDesign> designs_;
  std::vector<std::vector<double>> y_;
  std::vector<std::vector<double>> w_;      // treatment indicator as doubles
  std::vector<std::vector<double>> x_;      // kept for design rebuilds
  std::vector<std::vector<double>> kappa_;  // k (y - 1/2)
  std::vector<std::string> warnings_;
  mutable std::vector<double> zb_, tmp_;
};

PosteriorDraws run_chain_binary(const BinaryModelSpec& spec);

}  // namespace hrdd
