#include "hrdd/polya_gamma.hpp"

#include <cmath>
#include <cstddef>

#include "hrdd/errors.hpp"

namespace hrdd {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTrunc = 0.64;            // left/right split point for b=1
constexpr double kDecompositionMax = 50.0; // above this, gamma series

double log_phi(double x) {  // log of the standard normal CDF
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::sqrt(2.0)));
  const double x2 = x * x;
  return -0.5 * x2 - 0.5 * std::log(2.0 * kPi) - std::log(-x) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

// P(right exponential piece) for the b=1 proposal mixture.
double mass_texpon(double z) {
  const double t = kTrunc;
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
  const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
  const double x0 = std::log(fz) + fz * t;
  const double xb = x0 - z + log_phi(b);
  const double xa = x0 + z + log_phi(a);
  const double qdivp = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + qdivp);
}

double a_coef(int n, double x) {
  const double np5 = n + 0.5;
  if (x > kTrunc)
    return kPi * np5 * std::exp(-0.5 * np5 * np5 * kPi * kPi * x);
  return kPi * np5 * std::pow(2.0 / (kPi * x), 1.5) * std::exp(-2.0 * np5 * np5 / x);
}

// Inverse-Gaussian(1/z, 1) truncated to (0, kTrunc].
double rtigauss(RngStream& rng, double z) {
  const double t = kTrunc;
  if (z <= 0.0 || 1.0 / z > t) {
    // mean above the truncation point: chi-square-based proposal on (0,t]
    for (;;) {
      double e1, e2;
      do {
        e1 = rng.exponential(1.0);
        e2 = rng.exponential(1.0);
      } while (e1 * e1 > 2.0 * e2 / t);
      const double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (rng.uniform01() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  const double mu = 1.0 / z;
  for (;;) {
    const double n = rng.normal();
    const double y = n * n;
    const double muy = mu * y;
    double x = mu + 0.5 * mu * muy - 0.5 * mu * std::sqrt(4.0 * muy + muy * muy);
    if (rng.uniform01() > mu / (mu + x)) x = mu * mu / x;
    if (x <= t) return x;
  }
}

// Acceptance test U <= 1 - psi(x, b) where 1 - psi is the alternating series
// sum_j (-1)^j r_j, r_0 = 1.  Terms are provably decreasing once
// j >= sqrt(x)/2 (for b <= 1), so the non-monotone prefix is summed in full
// and the tail is bracketed by its partial sums: after a negative term the
// partial sum is a lower bound on the limit, after a positive one an upper
// bound.  Decides the comparison exactly up to floating-point rounding.
bool accept_small_b(RngStream& rng, double x, double b) {
  const double u = rng.uniform01();
  const std::size_t j0 =
      static_cast<std::size_t>(std::ceil(0.5 * std::sqrt(x))) + 1;
  double s = 1.0;
  double term = (2.0 + b) * std::exp(-2.0 * (1.0 + b) / x);  // r_1
  double sign = -1.0;
  for (std::size_t j = 1;; ++j) {
    s += sign * term;
    if (j >= j0) {
      if (sign < 0.0 && u <= s) return true;  // s is a lower bound
      if (sign > 0.0 && u > s) return false;  // s is an upper bound
    }
    if (j > 2000000000) throw NumericalError("polya-gamma series did not resolve");
    // r_{j+1} = r_j * ((j+b)/(j+1)) * ((2j+2+b)/(2j+b)) * exp(-2(2j+1+b)/x)
    const double dj = static_cast<double>(j);
    term *= (dj + b) / (dj + 1.0) * (2.0 * dj + 2.0 + b) / (2.0 * dj + b) *
            std::exp(-2.0 * (2.0 * dj + 1.0 + b) / x);
    sign = -sign;
  }
}

}  // namespace

namespace pg_detail {

double draw_unit(RngStream& rng, double z) {
  z = std::fabs(z);
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  for (;;) {
    double x;
    if (rng.uniform01() < mass_texpon(z))
      x = kTrunc + rng.exponential(fz);
    else
      x = rtigauss(rng, z);
    // alternating-series accept/reject on a_n(x)
    double s = a_coef(0, x);
    const double y = rng.uniform01() * s;
    for (int n = 1;; ++n) {
      if (n & 1) {
        s -= a_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += a_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

double draw_small_b(RngStream& rng, double b, double z) {
  z = std::fabs(z);
  for (;;) {
    double x;
    if (z > 0.0) {
      x = rng.inverse_gaussian(b / z, b * b);
    } else {
      const double n = rng.normal();
      x = b * b / (n * n);  // inverse-gamma(1/2, b^2/2)
    }
    if (x > 0.0 && std::isfinite(x) && accept_small_b(rng, x, b))
      return 0.25 * x;
  }
}

double draw_gamma_series(RngStream& rng, double b, double c) {
  // PG(b,c) = (1/2pi^2) sum_k g_k / ((k-1/2)^2 + d^2), g_k ~ Ga(b,1),
  // d = |c|/(2pi).  Dropped tail replaced by its exact mean via
  // sum_{k>=1} 1/((k-1/2)^2 + d^2) = (pi/2d) tanh(pi d).
  const double d = std::fabs(c) / (2.0 * kPi);
  const double d2 = d * d;
  const double full_sum =
      d < 1e-8 ? 0.5 * kPi * kPi : (kPi / (2.0 * d)) * std::tanh(kPi * d);
  double acc = 0.0;
  double partial = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double km = k - 0.5;
    const double wk = 1.0 / (km * km + d2);
    acc += rng.gamma_rate(b, 1.0) * wk;
    partial += wk;
    if (b * (full_sum - partial) < 1e-9 * acc) break;
  }
  acc += b * (full_sum - partial);  // tail mean
  return acc / (2.0 * kPi * kPi);
}

}  // namespace pg_detail

double pg_mean(double b, double c) {
  if (!(b > 0.0)) throw DomainError("pg_mean: b must be > 0");
  const double a = std::fabs(c);
  if (a < 1e-4) return b * (0.25 - a * a / 48.0);
  return b / (2.0 * a) * std::tanh(0.5 * a);
}

double pg_var(double b, double c) {
  if (!(b > 0.0)) throw DomainError("pg_var: b must be > 0");
  const double a = std::fabs(c);
  if (a < 1e-4) return b * (1.0 - a * a / 5.0) / 24.0;
  const double ch = std::cosh(0.5 * a);
  return b / (4.0 * a * a * a) * (std::sinh(a) - a) / (ch * ch);
}

double pg_draw(RngStream& rng, double b, double c) {
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("pg_draw: b must be a positive real");
  if (!std::isfinite(c)) throw DomainError("pg_draw: c must be finite");
  if (b > kDecompositionMax) return pg_detail::draw_gamma_series(rng, b, c);
  const double z = 0.5 * std::fabs(c);
  double total = 0.0;
  double whole;
  double frac = std::modf(b, &whole);
  // absorb float fuzz around integers
  if (frac < 1e-12) {
    frac = 0.0;
  } else if (frac > 1.0 - 1e-12) {
    frac = 0.0;
    whole += 1.0;
  }
  for (long i = 0; i < static_cast<long>(whole); ++i)
    total += pg_detail::draw_unit(rng, z);
  if (frac > 0.0) total += pg_detail::draw_small_b(rng, frac, z);
  return total;
}

}  // namespace hrdd
