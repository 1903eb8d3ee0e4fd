#include "hrdd/baseline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "hrdd/design.hpp"
#include "hrdd/errors.hpp"

namespace hrdd {

namespace {

constexpr double kZ975 = 1.959964;

FreqEstimate wls_rdd(const std::vector<const GroupData*>& groups, double c,
                     double h, KernelKind kernel, int q) {
  if (q < 1) throw DomainError("wls_rdd: q must be >= 1");
  const int p = 2 * q + 1;
  const int d = p + 1;  // W column + design columns

  std::vector<double> xs, ys, ks;
  std::size_t n_minus = 0, n_plus = 0;
  for (const GroupData* g : groups) {
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double k = kernel_weight(g->x[i], c, h, kernel);
      if (k <= 0.0) continue;
      xs.push_back(g->x[i]);
      ys.push_back(g->y[i]);
      ks.push_back(k);
      if (g->x[i] >= c)
        ++n_plus;
      else
        ++n_minus;
    }
  }
  const std::size_t n = xs.size();
  if (n_minus == 0 || n_plus == 0)
    throw ValidationError(ValidationError::Kind::OneSidedData,
                          "no effective observations on one side of the cutoff");
  if (n < static_cast<std::size_t>(d))
    throw ValidationError(ValidationError::Kind::RankDeficient,
                          "fewer effective observations than regressors");

  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd y(n), k(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = xs[i] >= c ? 1.0 : 0.0;
    const auto row = design_row(xs[i], c, q);
    for (int j = 0; j < p; ++j) X(i, j + 1) = row[static_cast<std::size_t>(j)];
    y(i) = ys[i];
    k(i) = ks[i];
  }

  const Eigen::MatrixXd Xk = k.asDiagonal() * X;
  const Eigen::MatrixXd bread = X.transpose() * Xk;  // X' K X
  Eigen::FullPivLU<Eigen::MatrixXd> lu(bread);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible())
    throw ValidationError(ValidationError::Kind::RankDeficient,
                          "weighted design matrix is rank deficient");
  const Eigen::VectorXd coef = lu.solve(X.transpose() * (k.asDiagonal() * y));
  const Eigen::VectorXd e = y - X * coef;

  // HC0: (X'KX)^{-1} [sum k^2 e^2 x x'] (X'KX)^{-1}
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double wgt = k(i) * k(i) * e(i) * e(i);
    meat.noalias() += wgt * X.row(i).transpose() * X.row(i);
  }
  const Eigen::MatrixXd bread_inv = lu.inverse();
  const Eigen::MatrixXd V = bread_inv * meat * bread_inv;

  FreqEstimate out;
  out.tau_hat = coef(0);
  out.se = std::sqrt(std::max(V(0, 0), 0.0));
  out.ci_low = out.tau_hat - kZ975 * out.se;
  out.ci_high = out.tau_hat + kZ975 * out.se;
  out.h_used = h;
  out.n_effective = n;
  return out;
}

}  // namespace

FreqEstimate fit_separate_wls(const GroupData& g, double c, double h,
                              KernelKind kernel, int q) {
  return wls_rdd({&g}, c, h, kernel, q);
}

FreqEstimate fit_pooled(const Dataset& d, double c, double h, KernelKind kernel,
                        int q) {
  std::vector<const GroupData*> ptrs;
  ptrs.reserve(d.groups.size());
  for (const auto& g : d.groups) ptrs.push_back(&g);
  return wls_rdd(ptrs, c, h, kernel, q);
}

double baseline_bandwidth(const GroupData& g, double c, int q) {
  const std::size_t n = g.size();
  if (n < 4) throw DomainError("baseline_bandwidth: need n >= 4");
  const std::size_t need = static_cast<std::size_t>(2 * q + 1) + 1;  // p+1 per side

  std::vector<double> d_minus, d_plus;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::fabs(g.x[i] - c);
    ss += d * d;
    (g.x[i] >= c ? d_plus : d_minus).push_back(d);
  }
  // spread of the running variable about the cutoff (the distances' natural
  // center is zero, so this is their sd, not the sd around the mean distance)
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0))
    throw ValidationError(ValidationError::Kind::DegenerateSupport,
                          "running variable has zero spread");
  if (d_minus.size() < need || d_plus.size() < need)
    throw ValidationError(ValidationError::Kind::DegenerateSupport,
                          "too few observations on one side of the cutoff");

  double h = 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
  // floor: strictly cover the (p+1)-th closest point on each side so its
  // triangular weight stays positive
  std::nth_element(d_minus.begin(), d_minus.begin() + (need - 1), d_minus.end());
  std::nth_element(d_plus.begin(), d_plus.begin() + (need - 1), d_plus.end());
  const double floor_h =
      std::max(d_minus[need - 1], d_plus[need - 1]) * (1.0 + 1e-9) + 1e-300;
  return std::max(h, floor_h);
}

}  // namespace hrdd
