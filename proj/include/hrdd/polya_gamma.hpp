#pragma once

#include "hrdd/rng.hpp"

// Exact Polya-gamma sampling for real b > 0.
//
//   b = 1        alternating-series accept/reject on the two-piece
//                (truncated inverse-Gaussian / exponential) proposal
//   b in (0,1)   accept/reject with an inverse-Gaussian proposal whose
//                acceptance probability is an alternating series, evaluated
//                adaptively to full precision (never truncated at a fixed
//                term count)
//   b in (1,50]  additivity: floor(b) unit draws + one fractional draw
//   b > 50       truncated weighted sum of gamma variates (<=200 terms,
//                relative tail bound 1e-9) plus the exact mean of the
//                dropped tail

namespace hrdd {

// E[PG(b,c)] = (b/2c) tanh(c/2); b/4 at c=0.
double pg_mean(double b, double c);
// Var[PG(b,c)] = (b/4c^3) (sinh c - c)/cosh^2(c/2); b/24 at c=0.
double pg_var(double b, double c);

double pg_draw(RngStream& rng, double b, double c);

namespace pg_detail {
// PG(1, c) with z = |c|/2 pre-halved.
double draw_unit(RngStream& rng, double z);
// PG(b, c) for 0 < b < 1, z = |c|/2.
double draw_small_b(RngStream& rng, double b, double z);
// Weighted gamma-series representation, any b > 0.
double draw_gamma_series(RngStream& rng, double b, double c);
}  // namespace pg_detail

}  // namespace hrdd
