#pragma once

// Brute-force numeric oracles shared by the test suites: 1-D quadrature on
// dense grids, moments of tabulated densities, and a direct evaluation of
// the Polya-gamma density via its alternating series.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double kpi() { return 3.14159265358979323846; }

struct Tabulated {
  std::vector<double> x;
  std::vector<double> f;  // density values, not necessarily normalized
};

inline Tabulated tabulate(const std::function<double(double)>& f, double lo,
                          double hi, std::size_t n = 20001) {
  if (n < 3 || !(hi > lo)) throw std::invalid_argument("tabulate: bad grid");
  if (n % 2 == 0) ++n;  // Simpson needs an odd point count
  Tabulated t;
  t.x.resize(n);
  t.f.resize(n);
  const double dx = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    t.x[i] = lo + dx * static_cast<double>(i);
    t.f[i] = f(t.x[i]);
  }
  return t;
}

// Composite Simpson over the tabulated grid (uniform spacing assumed).
inline double integrate(const Tabulated& t) {
  const std::size_t n = t.x.size();
  const double dx = t.x[1] - t.x[0];
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i + 1 < n; i += 2) odd += t.f[i];
  for (std::size_t i = 2; i + 1 < n; i += 2) even += t.f[i];
  return dx / 3.0 * (t.f.front() + t.f.back() + 4.0 * odd + 2.0 * even);
}

inline double moment(const Tabulated& t, int k) {
  Tabulated m = t;
  for (std::size_t i = 0; i < m.x.size(); ++i)
    m.f[i] *= std::pow(m.x[i], k);
  return integrate(m);
}

struct Moments {
  double mean;
  double var;
};

// Normalizing constant handled internally; returns mean and variance of the
// (unnormalized) density tabulated in t.
inline Moments moments(const Tabulated& t) {
  const double z = integrate(t);
  const double m1 = moment(t, 1) / z;
  const double m2 = moment(t, 2) / z;
  return {m1, m2 - m1 * m1};
}

// CDF at the grid points by cumulative Simpson on pairs of panels
// (trapezoid fallback on the final odd panel); normalized to end at 1.
inline std::vector<double> cdf_grid(const Tabulated& t) {
  const std::size_t n = t.x.size();
  const double dx = t.x[1] - t.x[0];
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 2; i < n; i += 2)
    c[i] = c[i - 2] + dx / 3.0 * (t.f[i - 2] + 4.0 * t.f[i - 1] + t.f[i]);
  for (std::size_t i = 1; i < n; i += 2)
    c[i] = c[i - 1] + 0.5 * dx * (t.f[i - 1] + t.f[i]);
  const double z = c[n - 1] > c[n - 2] ? c[n - 1] : c[n - 2];
  for (auto& v : c) v = v / z < 1.0 ? v / z : 1.0;
  return c;
}

// Polya-gamma density f(w | b, c) via the alternating series for the
// underlying tilted Jacobi variable: f_J(x|b,0) =
// (2^b/Gamma(b)) sum_n (-1)^n [Gamma(n+b)/Gamma(n+1)] (2n+b)/sqrt(2 pi x^3)
//   exp(-(2n+b)^2/(2x)),
// with tilt cosh(z)^b exp(-x z^2/2), z = c/2, and w = x/4.
inline double pg_density(double w, double b, double c) {
  if (!(w > 0.0)) return 0.0;
  const double x = 4.0 * w;
  const double z = 0.5 * std::fabs(c);
  const double lgb = std::lgamma(b);
  double s = 0.0;
  double prev_abs = INFINITY;
  std::size_t tail_small = 0;
  for (std::size_t n = 0; n < 200000; ++n) {
    const double dn = static_cast<double>(n);
    const double tn = 2.0 * dn + b;
    const double lt = std::lgamma(dn + b) - std::lgamma(dn + 1.0) - lgb +
                      std::log(tn) - tn * tn / (2.0 * x);
    const double term = std::exp(lt);
    s += (n % 2 == 0 ? term : -term);
    if (term < prev_abs && term < 1e-17 * std::fabs(s) + 1e-300) {
      if (++tail_small >= 3) break;
    } else {
      tail_small = 0;
    }
    prev_abs = term;
  }
  if (s <= 0.0) return 0.0;  // deep-tail cancellation noise
  const double log_tilt = b * std::log(std::cosh(z)) - 0.5 * x * z * z;
  const double log_base = b * std::log(2.0) - 0.5 * std::log(2.0 * kpi() * x * x * x);
  return 4.0 * std::exp(log_base + log_tilt) * s;
}

}  // namespace oracle
