#pragma once

#include <cstddef>
#include <vector>

#include "hrdd/data.hpp"

namespace hrdd {

double kernel_weight(double x, double c, double h, KernelKind kernel);

// (1, (x-c)_-, (x-c)_+, ..., (x-c)_-^q, (x-c)_+^q) with (t)_- = min(t,0),
// (t)_+ = max(t,0).
std::vector<double> design_row(double x, double c, int q);

// One group's local-polynomial design at bandwidth h.  Columns are stored
// contiguously (column-major) so the samplers can run weighted reductions
// straight over them.
struct GroupDesign {
  std::vector<std::vector<double>> z_col;  // p columns, each length n_g
  std::vector<double> k;                   // kernel weights in [0,1]
  double h = 0.0;
  std::vector<std::size_t> active;         // indices with k > 0
  std::size_t n_active_minus = 0;          // active obs with x < c
  std::size_t n_active_plus = 0;           // active obs with x >= c

  std::size_t n() const { return k.size(); }
  std::size_t p() const { return z_col.size(); }
};

GroupDesign build_design(const GroupData& g, double c, double h, int q,
                         KernelKind kernel);

}  // namespace hrdd
