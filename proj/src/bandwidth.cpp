#include "hrdd/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hrdd/design.hpp"
#include "hrdd/errors.hpp"

namespace hrdd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t eval_count(std::size_t n) {
  double m = std::ceil(std::max(0.02 * static_cast<double>(n), 5.0));
  return std::min(n, static_cast<std::size_t>(m));
}

bool candidate_feasible(const GroupData& g, double c, const Hyperparams& hp,
                        double h) {
  const std::size_t need = static_cast<std::size_t>(hp.p()) + 1;
  std::size_t n_minus = 0, n_plus = 0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    if (kernel_weight(g.x[i], c, h, hp.kernel) <= 0.0) continue;
    if (g.x[i] < c)
      ++n_minus;
    else
      ++n_plus;
  }
  return n_minus >= need && n_plus >= need;
}

}  // namespace

std::vector<std::size_t> evaluation_set(const GroupData& g, double c) {
  const std::size_t n = g.x.size();
  if (n == 0) throw ValidationError(ValidationError::Kind::EmptyGroup, "evaluation_set: empty group");
  const std::size_t m = eval_count(n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(g.x[a] - c) < std::abs(g.x[b] - c);
  });
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::size_t first_feasible_candidate(const GroupData& g, double c,
                                     const Hyperparams& hp,
                                     const std::vector<double>& candidates) {
  for (std::size_t l = 0; l < candidates.size(); ++l)
    if (candidate_feasible(g, c, hp, candidates[l])) return l;
  throw ValidationError(
      ValidationError::Kind::DegenerateSupport,
      "no candidate bandwidth leaves enough kernel support on both sides of "
      "the cutoff for every group");
}

std::vector<double> build_candidate_grid(const Dataset& d, const Hyperparams& hp,
                                         int L) {
  if (L < 2) throw DomainError("build_candidate_grid: need at least 2 candidates");
  std::vector<double> dist;
  dist.reserve(d.n_total());
  for (const auto& g : d.groups)
    for (double x : g.x) dist.push_back(std::abs(x - d.c));
  if (dist.empty())
    throw ValidationError(ValidationError::Kind::EmptyGroup,
                          "build_candidate_grid: empty dataset");
  std::sort(dist.begin(), dist.end());
  const double hi = dist.back();
  if (hi <= 0.0)
    throw ValidationError(ValidationError::Kind::DegenerateSupport,
                          "all observations sit exactly at the cutoff");
  double lo = quantile_sorted(dist, 0.10);
  if (lo <= 0.0) {
    auto it = std::upper_bound(dist.begin(), dist.end(), 0.0);
    lo = (it == dist.end()) ? hi : *it;
  }

  std::vector<double> cand;
  cand.reserve(static_cast<std::size_t>(L));
  const double log_ratio = std::log(hi / lo);
  for (int l = 0; l < L; ++l) {
    double a = (l + 1 == L) ? hi : lo * std::exp(log_ratio * l / (L - 1));
    if (cand.empty() || a > cand.back() * (1.0 + 1e-12)) cand.push_back(a);
  }
  for (const auto& g : d.groups) first_feasible_candidate(g, d.c, hp, cand);
  return cand;
}

HillClimb::HillClimb(std::size_t start, std::size_t n_candidates)
    : idx(start), best_idx(start), best_score(kInf), prev_score(kInf) {
  if (n_candidates == 0 || start >= n_candidates)
    throw DomainError("HillClimb: start index outside candidate grid");
  // nothing above the start point, so there is nothing to explore
  if (start + 1 == n_candidates) frozen = true;
}

bool HillClimb::step(double score, std::size_t n_candidates) {
  if (frozen) return false;
  if (score < best_score || (score == best_score && idx > best_idx)) {
    best_score = score;
    best_idx = idx;
  }
  if (!has_prev) {
    has_prev = true;
    prev_score = score;
    ++idx;  // first comparison needs a second scored candidate
    return true;
  }
  if (score <= prev_score) {  // improved (ties prefer the larger bandwidth)
    prev_score = score;
    if (idx + 1 < n_candidates) {
      ++idx;
      return true;
    }
    frozen = true;
    exhausted = true;  // still improving at the top of the grid
    return false;
  }
  --idx;  // worse: revert to the previous candidate and stop
  frozen = true;
  return true;
}

GroupScoreAccum::GroupScoreAccum(std::vector<std::size_t> eval_idx)
    : eval_idx_(std::move(eval_idx)),
      sum_a_(eval_idx_.size(), 0.0),
      sum_b_(eval_idx_.size(), 0.0),
      sum_l_(eval_idx_.size(), 0.0) {}

void GroupScoreAccum::reset() {
  std::fill(sum_a_.begin(), sum_a_.end(), 0.0);
  std::fill(sum_b_.begin(), sum_b_.end(), 0.0);
  std::fill(sum_l_.begin(), sum_l_.end(), 0.0);
  n_ = 0;
}

void GroupScoreAccum::add(const ContinuousSampler& smp, const ChainState& s,
                          std::size_t g) {
  smp.residuals(g, s, scratch_);
  const auto& k = smp.design(g).k;
  const auto& u = s.u[g];
  for (std::size_t j = 0; j < eval_idx_.size(); ++j) {
    const std::size_t i = eval_idx_[j];
    const double l2 = -s.omega * u[i] * k[i];
    const double l1 = l2 * scratch_[i];
    sum_a_[j] += l2 + l1 * l1;
    sum_b_[j] += l1;
  }
  ++n_;
}

void GroupScoreAccum::add(const BinarySampler& smp, const ChainState& s,
                          std::size_t g) {
  smp.linear_predictor(g, s, scratch_);
  const auto& kappa = smp.kappa(g);
  for (std::size_t j = 0; j < eval_idx_.size(); ++j) {
    const std::size_t i = eval_idx_[j];
    // mu k (1 - 2y) = -2 mu kappa; clamp to dodge overflow on wild sweeps
    double t = -2.0 * scratch_[i] * kappa[i];
    t = std::clamp(t, -700.0, 700.0);
    sum_l_[j] += std::exp(t);
  }
  ++n_;
}

double GroupScoreAccum::continuous_score() const {
  if (n_ < 2)
    throw ValidationError(ValidationError::Kind::InsufficientDraws,
                          "score needs at least two retained draws");
  double score = 0.0;
  for (std::size_t j = 0; j < eval_idx_.size(); ++j) {
    const double ea = sum_a_[j] / static_cast<double>(n_);
    const double eb = sum_b_[j] / static_cast<double>(n_);
    score += 2.0 * ea - eb * eb;
  }
  return score;
}

double GroupScoreAccum::binary_score() const {
  if (n_ < 2)
    throw ValidationError(ValidationError::Kind::InsufficientDraws,
                          "score needs at least two retained draws");
  double score = 0.0;
  for (std::size_t j = 0; j < eval_idx_.size(); ++j) {
    const double el = std::max(sum_l_[j] / static_cast<double>(n_), 1e-300);
    score += el * el - 2.0 / el;
  }
  return score;
}

namespace {

struct ContinuousHooks {
  using Spec = ContinuousModelSpec;
  using Sampler = ContinuousSampler;
  static Sampler make(const Spec& spec, const std::vector<double>& h) {
    return Sampler(spec.dataset, spec.hyper, h, spec.seed, spec.fixed_omega);
  }
  static double score(const GroupScoreAccum& a) { return a.continuous_score(); }
  static PosteriorDraws final_run(const Spec& spec, const std::vector<double>& h) {
    Spec s2 = spec;
    s2.h = h;
    return run_chain_continuous(s2);
  }
};

struct BinaryHooks {
  using Spec = BinaryModelSpec;
  using Sampler = BinarySampler;
  static Sampler make(const Spec& spec, const std::vector<double>& h) {
    return Sampler(spec.dataset, spec.hyper, h, spec.seed);
  }
  static double score(const GroupScoreAccum& a) { return a.binary_score(); }
  static PosteriorDraws final_run(const Spec& spec, const std::vector<double>& h) {
    Spec s2 = spec;
    s2.h = h;
    return run_chain_binary(s2);
  }
};

template <class Hooks>
BandwidthResult run_selection(const typename Hooks::Spec& spec,
                              BandwidthPlan plan) {
  const Dataset& data = spec.dataset;
  const std::size_t G = data.groups.size();
  if (G == 0)
    throw ValidationError(ValidationError::Kind::EmptyGroup,
                          "bandwidth selection: dataset has no groups");
  if (spec.n_burn < 0 || spec.n_iter <= spec.n_burn)
    throw DomainError("bandwidth selection: need n_iter > n_burn >= 0");
  const std::size_t N = plan.candidates.size();
  if (N == 0) throw DomainError("bandwidth selection: empty candidate grid");
  for (std::size_t l = 0; l < N; ++l) {
    if (!(plan.candidates[l] > 0.0) || !std::isfinite(plan.candidates[l]))
      throw DomainError("bandwidth selection: candidates must be positive");
    if (l > 0 && plan.candidates[l] <= plan.candidates[l - 1])
      throw DomainError("bandwidth selection: candidates must be strictly increasing");
  }
  if (plan.batch_len < 2)
    throw DomainError("bandwidth selection: batch_len must be at least 2");
  if (plan.warmup_len < 0)
    throw DomainError("bandwidth selection: warmup_len must be nonnegative");
  const bool global = plan.mode == BandwidthMode::global;

  std::vector<std::size_t> start(G);
  for (std::size_t g = 0; g < G; ++g)
    start[g] = first_feasible_candidate(data.groups[g], data.c, spec.hyper,
                                        plan.candidates);
  if (global) {
    const std::size_t s0 = *std::max_element(start.begin(), start.end());
    std::fill(start.begin(), start.end(), s0);
  }

  std::vector<HillClimb> climbs;
  climbs.reserve(global ? 1 : G);
  if (global) {
    climbs.emplace_back(start[0], N);
  } else {
    for (std::size_t g = 0; g < G; ++g) climbs.emplace_back(start[g], N);
  }
  auto group_climb = [&](std::size_t g) -> HillClimb& {
    return climbs[global ? 0 : g];
  };

  std::vector<double> h(G);
  for (std::size_t g = 0; g < G; ++g) h[g] = plan.candidates[group_climb(g).idx];

  auto sampler = Hooks::make(spec, h);
  ChainState state = sampler.init_state();

  std::vector<GroupScoreAccum> accums;
  accums.reserve(G);
  for (std::size_t g = 0; g < G; ++g)
    accums.emplace_back(evaluation_set(data.groups[g], data.c));

  plan.score_trace.assign(G, std::vector<std::pair<double, double>>{});
  std::uint64_t sweep_idx = 0;
  bool h_changed = true;
  auto any_active = [&]() {
    for (const auto& cl : climbs)
      if (!cl.frozen) return true;
    return false;
  };

  std::vector<double> scores(G, 0.0);
  while (any_active()) {
    if (h_changed)
      for (int t = 0; t < plan.warmup_len; ++t) sampler.sweep(state, sweep_idx++);
    for (auto& a : accums) a.reset();
    for (int t = 0; t < plan.batch_len; ++t) {
      sampler.sweep(state, sweep_idx++);
      for (std::size_t g = 0; g < G; ++g)
        if (!group_climb(g).frozen) accums[g].add(sampler, state, g);
    }
    for (std::size_t g = 0; g < G; ++g) {
      if (group_climb(g).frozen) continue;
      scores[g] = Hooks::score(accums[g]);
      plan.score_trace[g].emplace_back(h[g], scores[g]);
    }

    h_changed = false;
    if (global) {
      double avg = 0.0;
      for (std::size_t g = 0; g < G; ++g) avg += scores[g];
      avg /= static_cast<double>(G);
      if (climbs[0].step(avg, N)) {
        for (std::size_t g = 0; g < G; ++g) h[g] = plan.candidates[climbs[0].idx];
        h_changed = true;
      }
    } else {
      for (std::size_t g = 0; g < G; ++g) {
        HillClimb& cl = climbs[g];
        if (cl.frozen) continue;
        if (cl.step(scores[g], N)) {
          h[g] = plan.candidates[cl.idx];
          h_changed = true;
        }
      }
    }
    if (h_changed) sampler.set_bandwidths(state, h);
  }

  plan.selected.resize(G);
  for (std::size_t g = 0; g < G; ++g) {
    const HillClimb& cl = group_climb(g);
    // a frozen climb always sits at its best-scoring candidate
    plan.selected[g] = plan.candidates[cl.idx];
    if (cl.exhausted && (!global || g == 0))
      plan.warnings.push_back(
          (global ? std::string("common bandwidth") : "group " + std::to_string(g)) +
          ": grid exhausted while the score was still improving; frozen at the "
          "largest candidate");
  }

  BandwidthResult out;
  out.draws = Hooks::final_run(spec, plan.selected);
  out.plan = std::move(plan);
  return out;
}

}  // namespace

BandwidthResult select_local_bandwidths(const ContinuousModelSpec& spec,
                                        BandwidthPlan plan) {
  plan.mode = BandwidthMode::local;
  return run_selection<ContinuousHooks>(spec, std::move(plan));
}

BandwidthResult select_local_bandwidths(const BinaryModelSpec& spec,
                                        BandwidthPlan plan) {
  plan.mode = BandwidthMode::local;
  return run_selection<BinaryHooks>(spec, std::move(plan));
}

BandwidthResult select_global_bandwidth(const ContinuousModelSpec& spec,
                                        BandwidthPlan plan) {
  plan.mode = BandwidthMode::global;
  return run_selection<ContinuousHooks>(spec, std::move(plan));
}

BandwidthResult select_global_bandwidth(const BinaryModelSpec& spec,
                                        BandwidthPlan plan) {
  plan.mode = BandwidthMode::global;
  return run_selection<BinaryHooks>(spec, std::move(plan));
}

}  // namespace hrdd
