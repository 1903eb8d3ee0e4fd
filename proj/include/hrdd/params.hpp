#pragma once

#include <vector>

// Closed-form full-conditional parameters.  The samplers draw from these;
// the test suites compare them against grid-normalized brute-force
// densities.

namespace hrdd {

struct GammaParams {
  double shape;
  double rate;
};

struct InvGammaParams {
  double shape;
  double rate;  // density ~ x^{-shape-1} exp(-rate/x)
};

struct NormalParams {
  double mean;
  double var;
};

struct BetaParams {
  double a;
  double b;
};

struct MvnParams {
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;
};

}  // namespace hrdd
