#include "hrdd/design.hpp"

#include <cmath>

#include "hrdd/errors.hpp"

namespace hrdd {

double kernel_weight(double x, double c, double h, KernelKind kernel) {
  if (!(h > 0.0)) throw DomainError("kernel_weight: h must be > 0");
  const double t = std::fabs(x - c) / h;
  if (kernel == KernelKind::window) return t <= 1.0 ? 1.0 : 0.0;
  return t < 1.0 ? 1.0 - t : 0.0;
}

std::vector<double> design_row(double x, double c, int q) {
  if (q < 1) throw DomainError("design_row: q must be >= 1");
  const double t = x - c;
  const double tm = t < 0.0 ? t : 0.0;
  const double tp = t > 0.0 ? t : 0.0;
  std::vector<double> row(2 * q + 1);
  row[0] = 1.0;
  double pm = 1.0, pp = 1.0;
  for (int j = 1; j <= q; ++j) {
    pm *= tm;
    pp *= tp;
    row[2 * j - 1] = pm;
    row[2 * j] = pp;
  }
  return row;
}

GroupDesign build_design(const GroupData& g, double c, double h, int q,
                         KernelKind kernel) {
  if (!(h > 0.0)) throw DomainError("build_design: h must be > 0");
  if (q < 1) throw DomainError("build_design: q must be >= 1");
  const std::size_t n = g.size();
  const int p = 2 * q + 1;
  GroupDesign d;
  d.h = h;
  d.z_col.assign(static_cast<std::size_t>(p), std::vector<double>(n));
  d.k.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = design_row(g.x[i], c, q);
    for (int j = 0; j < p; ++j) d.z_col[static_cast<std::size_t>(j)][i] = row[static_cast<std::size_t>(j)];
    d.k[i] = kernel_weight(g.x[i], c, h, kernel);
    if (d.k[i] > 0.0) {
      d.active.push_back(i);
      if (g.x[i] >= c)
        ++d.n_active_plus;
      else
        ++d.n_active_minus;
    }
  }
  return d;
}

}  // namespace hrdd
