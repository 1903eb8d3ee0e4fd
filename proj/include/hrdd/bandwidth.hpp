#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hrdd/data.hpp"
#include "hrdd/gibbs_binary.hpp"
#include "hrdd/gibbs_continuous.hpp"

namespace hrdd {

enum class BandwidthMode { local, global };

// Candidate grid plus the batch hill-climb controls.  After selection,
// `selected` holds one bandwidth per group, `score_trace` the (h, score)
// pairs each group observed, and `warnings` anything the search had to
// resolve (e.g. freezing at the best candidate on grid exhaustion).
struct BandwidthPlan {
  std::vector<double> candidates;
  BandwidthMode mode = BandwidthMode::local;
  int batch_len = 100;  // scored sweeps per climb round
  int warmup_len = 50;  // unscored sweeps after any bandwidth change
  std::vector<double> selected;
  std::vector<std::vector<std::pair<double, double>>> score_trace;
  std::vector<std::string> warnings;
};

// Indices of the m observations nearest the cutoff by |x - c|,
// m = ceil(max(0.02 n, 5)) capped at n; ties broken by index order.
std::vector<std::size_t> evaluation_set(const GroupData& g, double c);

// Geometric grid (L points) from the 10th to the 100th percentile of the
// pooled |x - c|; near-duplicate points are merged, so fewer than L may come
// back.  Throws DegenerateSupport when some group has no candidate leaving
// at least p+1 observations with k > 0 on each side of the cutoff.
std::vector<double> build_candidate_grid(const Dataset& d, const Hyperparams& hp,
                                         int L = 8);

// Smallest candidate index usable for this group (>= p+1 active per side);
// throws DegenerateSupport when none qualifies.
std::size_t first_feasible_candidate(const GroupData& g, double c,
                                     const Hyperparams& hp,
                                     const std::vector<double>& candidates);

// One group's upward hill-climb over the candidate index: score the current
// candidate, move up while the score improves (ties prefer the larger
// bandwidth), revert and freeze on the first worsening.  Exposed separately
// so the termination properties are testable without running chains.
struct HillClimb {
  std::size_t idx = 0;
  std::size_t best_idx = 0;
  double best_score = 0.0;
  double prev_score = 0.0;
  bool frozen = false;
  bool has_prev = false;
  bool exhausted = false;  // hit the top while still improving

  explicit HillClimb(std::size_t start, std::size_t n_candidates);
  // Feed the score observed at `idx`; returns true when idx changed.
  bool step(double score, std::size_t n_candidates);
};

// Online accumulator for one group's Hyvarinen score over posterior sweeps:
// feed states during a batch, then read the score.  Continuous outcomes use
// l1 = -omega u k e and l2 = -omega u k summed as
//   sum_i { 2 E[l2 + l1^2] - (E[l1])^2 };
// binary outcomes use l = exp(mu k (1 - 2Y)) summed as
//   sum_i { (E[l])^2 - 2 (E[l])^-1 }.
class GroupScoreAccum {
 public:
  explicit GroupScoreAccum(std::vector<std::size_t> eval_idx);

  void add(const ContinuousSampler& smp, const ChainState& s, std::size_t g);
  void add(const BinarySampler& smp, const ChainState& s, std::size_t g);
  double continuous_score() const;  // InsufficientDraws when n_draws < 2
  double binary_score() const;
  std::size_t n_draws() const { return n_; }
  void reset();

 private:
  std::vector<std::size_t> eval_idx_;
  std::vector<double> sum_a_;   // l2 + l1^2
  std::vector<double> sum_b_;   // l1
  std::vector<double> sum_l_;   // binary l
  std::size_t n_ = 0;
  mutable std::vector<double> scratch_;
};

struct BandwidthResult {
  BandwidthPlan plan;
  PosteriorDraws draws;  // final re-run at the selected bandwidths
};

// Batch hill-climb selection; spec.h is ignored (the plan drives bandwidths)
// and the final chain is re-run fresh at the selected h with spec's full
// n_iter/n_burn schedule and seed.
BandwidthResult select_local_bandwidths(const ContinuousModelSpec& spec,
                                        BandwidthPlan plan);
BandwidthResult select_local_bandwidths(const BinaryModelSpec& spec,
                                        BandwidthPlan plan);
BandwidthResult select_global_bandwidth(const ContinuousModelSpec& spec,
                                        BandwidthPlan plan);
BandwidthResult select_global_bandwidth(const BinaryModelSpec& spec,
                                        BandwidthPlan plan);

}  // namespace hrdd
