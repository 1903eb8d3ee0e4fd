#include "hrdd/data.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hrdd/errors.hpp"

namespace hrdd {

void validate(const Dataset& d) {
  if (d.groups.empty())
    throw ValidationError(ValidationError::Kind::EmptyGroup, "dataset has no groups");
  for (std::size_t g = 0; g < d.groups.size(); ++g) {
    const auto& gd = d.groups[g];
    if (gd.size() == 0)
      throw ValidationError(ValidationError::Kind::EmptyGroup,
                            "group " + std::to_string(g) + " is empty",
                            static_cast<long>(g));
    if (gd.x.size() != gd.y.size() || gd.w.size() != gd.y.size())
      throw ValidationError(ValidationError::Kind::LengthMismatch,
                            "group " + std::to_string(g) +
                                ": y, x, w lengths differ",
                            static_cast<long>(g));
    for (std::size_t i = 0; i < gd.size(); ++i) {
      const bool treated = gd.x[i] >= d.c;
      if ((gd.w[i] != 0) != treated)
        throw ValidationError(
            ValidationError::Kind::SharpDesignViolation,
            "group " + std::to_string(g) + ", row " + std::to_string(i) +
                ": w inconsistent with I(x >= c)",
            static_cast<long>(g), static_cast<long>(i));
      if (d.outcome_kind == OutcomeKind::binary &&
          !(gd.y[i] == 0.0 || gd.y[i] == 1.0))
        throw ValidationError(
            ValidationError::Kind::NonBinaryOutcome,
            "group " + std::to_string(g) + ", row " + std::to_string(i) +
                ": binary outcome must be 0 or 1",
            static_cast<long>(g), static_cast<long>(i));
    }
  }
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw DomainError("quantile_sorted: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0))
    throw DomainError("quantile_sorted: prob outside [0,1]");
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = prob * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<GroupSummary> summarize_effects(
    const std::vector<std::vector<double>>& effect_draws) {
  if (effect_draws.empty())
    throw ValidationError(ValidationError::Kind::InsufficientDraws,
                          "no retained draws to summarize");
  const std::size_t n_draws = effect_draws.size();
  const std::size_t n_groups = effect_draws.front().size();
  std::vector<GroupSummary> out(n_groups);
  std::vector<double> col(n_draws);
  for (std::size_t g = 0; g < n_groups; ++g) {
    for (std::size_t d = 0; d < n_draws; ++d) col[d] = effect_draws[d][g];
    double m = 0;
    for (double v : col) m += v;
    m /= static_cast<double>(n_draws);
    double s2 = 0;
    for (double v : col) s2 += (v - m) * (v - m);
    const double sd =
        n_draws > 1 ? std::sqrt(s2 / static_cast<double>(n_draws - 1)) : 0.0;
    std::sort(col.begin(), col.end());
    out[g] = {m, sd, quantile_sorted(col, 0.025), quantile_sorted(col, 0.975)};
  }
  return out;
}

}  // namespace hrdd
