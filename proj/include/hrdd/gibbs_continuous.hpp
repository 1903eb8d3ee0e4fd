#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrdd/data.hpp"
#include "hrdd/design.hpp"
#include "hrdd/params.hpp"
#include "hrdd/rng.hpp"

namespace hrdd {

struct ContinuousModelSpec {
  Dataset dataset;
  Hyperparams hyper;
  std::vector<double> h;  // one bandwidth per group
  int n_iter = 1500;
  int n_burn = 500;
  std::uint64_t seed = 1;
  // Test hook: pin the global precision instead of sampling it.
  std::optional<double> fixed_omega;
};

// Gibbs sampler for the continuous-response hierarchical pseudo-model.
// Sweep order: omega -> {tau_g} -> {s_g, pi} -> {beta_g} -> psi's -> m's ->
// {u, r} -> w.  Every block forks its own RNG stream from
// (seed, sweep, block, group), so draws are independent of execution
// interleaving and thread count.
class ContinuousSampler {
 public:
  ContinuousSampler(const Dataset& data, const Hyperparams& hyper,
                    std::vector<double> h, std::uint64_t seed,
                    std::optional<double> fixed_omega = std::nullopt);

  std::size_t n_groups() const { return designs_.size(); }
  int p() const { return hyper_.p(); }
  const GroupDesign& design(std::size_t g) const { return designs_[g]; }
  const std::vector<double>& y(std::size_t g) const { return y_[g]; }
  const std::vector<double>& w(std::size_t g) const { return w_[g]; }
  const Hyperparams& hyper() const { return hyper_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Rebuild designs at new bandwidths mid-chain (bandwidth adaptation).
  // Observations that lose kernel support get (u, r) reset to (1, 0).
  void set_bandwidths(ChainState& state, const std::vector<double>& h);

  ChainState init_state() const;

  // --- full-conditional parameters (pure; exposed for oracle tests) ---
  GammaParams omega_conditional(const ChainState& s) const;
  NormalParams tau_conditional(std::size_t g, const ChainState& s) const;
  double spike_probability(std::size_t g, const ChainState& s) const;
  BetaParams pi_conditional(const ChainState& s) const;
  MvnParams beta_conditional(std::size_t g, const ChainState& s) const;
  InvGammaParams psi_tau_conditional(const ChainState& s) const;
  InvGammaParams psi_beta_conditional(int k, const ChainState& s) const;
  NormalParams m_tau_conditional(const ChainState& s) const;
  NormalParams m_beta_conditional(int k, const ChainState& s) const;
  // Collapsed P(r_ig = 1 | everything but u_ig).
  double outlier_probability(std::size_t g, std::size_t i, const ChainState& s) const;
  GammaParams u_conditional(std::size_t g, std::size_t i, const ChainState& s) const;
  BetaParams w_conditional(const ChainState& s) const;

  // --- block updates; `sweep_idx` seeds the block's RNG streams ---
  void update_omega(ChainState& s, std::uint64_t sweep_idx);
  void update_taus(ChainState& s, std::uint64_t sweep_idx);
  void update_spikes(ChainState& s, std::uint64_t sweep_idx);  // s_g and pi
  void update_betas(ChainState& s, std::uint64_t sweep_idx);
  void update_hyper_variances(ChainState& s, std::uint64_t sweep_idx);
  void update_hyper_means(ChainState& s, std::uint64_t sweep_idx);
  void update_outliers(ChainState& s, std::uint64_t sweep_idx);  // r, u, w

  void sweep(ChainState& s, std::uint64_t sweep_idx);

  // Replace Y with a draw from the pseudo-model at the current state
  // (observations with k=0 keep their Y).  Joint-distribution testing.
  void draw_response_from_model(ChainState& s, std::uint64_t sweep_idx);

  // residual e = y - tau_g w - Z beta_g for one group into `out`
  void residuals(std::size_t g, const ChainState& s, std::vector<double>& out) const;

 private:
  RngStream block_stream(std::uint64_t sweep_idx, std::uint64_t block,
                         std::uint64_t group) const;

  Hyperparams hyper_;
  double c_;
  std::uint64_t seed_;
  std::optional<double> fixed_omega_;
  std::vector<GroupDesign> designs_;
  std::vector<std::vector<double>> y_;
  std::vector<std::vector<double>> w_;  // treatment indicator as doubles
  std::vector<std::vector<double>> x_;  // kept to rebuild designs on set_bandwidths
  std::vector<std::string> warnings_;
  // scratch, reused across calls
  mutable std::vector<double> zb_, e_, tmp_;
};

PosteriorDraws run_chain_continuous(const ContinuousModelSpec& spec);

}  // namespace hrdd
