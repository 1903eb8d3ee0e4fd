#pragma once

#include <cstddef>

#include "hrdd/data.hpp"

namespace hrdd {

struct FreqEstimate {
  double tau_hat = 0.0;
  double se = 0.0;
  double ci_low = 0.0;   // tau_hat - 1.959964 se
  double ci_high = 0.0;  // tau_hat + 1.959964 se
  double h_used = 0.0;
  std::size_t n_effective = 0;  // obs with k > 0
};

// Kernel-weighted least squares of Y on (W, Z(c)); tau is the W coefficient,
// se the HC0 sandwich.
FreqEstimate fit_separate_wls(const GroupData& g, double c, double h,
                              KernelKind kernel, int q);

// Same estimator on all observations pooled: one tau, one beta.
FreqEstimate fit_pooled(const Dataset& d, double c, double h, KernelKind kernel,
                        int q);

// Rule-of-thumb h = 1.06 rms(x-c) n^{-1/5}, floored so each side keeps at
// least p+1 observations with k > 0.
double baseline_bandwidth(const GroupData& g, double c, int q = 1);

}  // namespace hrdd
