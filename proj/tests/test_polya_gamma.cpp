#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hrdd/errors.hpp"
#include "hrdd/polya_gamma.hpp"
#include "hrdd/rng.hpp"
#include "support/quadrature.hpp"

using namespace hrdd;

namespace {

struct MomentCheck {
  double mean, var, se_mean, se_var;
};

MomentCheck draw_moments(double b, double c, std::size_t n, std::uint64_t stream) {
  RngStream r(314159, stream);
  std::vector<double> x(n);
  for (auto& v : x) v = pg_draw(r, b, c);
  double m = 0;
  for (double v : x) m += v;
  m /= n;
  double s2 = 0, s4 = 0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    s2 += d;
    s4 += d * d;
  }
  const double var = s2 / n;
  return {m, var, std::sqrt(var / n), std::sqrt((s4 / n - var * var) / n)};
}

// two-sample KS statistic
double ks2(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

}  // namespace

TEST_CASE("mean and variance match closed forms at the pinned settings") {
  const double cases[][2] = {{1.0, 0.0}, {1.0, 2.0}, {0.5, 1.0}, {2.0, 3.0}};
  std::uint64_t stream = 1;
  for (const auto& bc : cases) {
    const double b = bc[0], c = bc[1];
    CAPTURE(b);
    CAPTURE(c);
    const auto mc = draw_moments(b, c, 100000, stream++);
    CHECK(std::fabs(mc.mean - pg_mean(b, c)) <= 3.0 * mc.se_mean);
    CHECK(std::fabs(mc.var - pg_var(b, c)) <= 3.0 * mc.se_var);
  }
}

TEST_CASE("closed-form moments at c=0 and continuity across the small-c branch") {
  CHECK(pg_mean(1.0, 0.0) == doctest::Approx(0.25));
  CHECK(pg_var(1.0, 0.0) == doctest::Approx(1.0 / 24.0));
  CHECK(pg_mean(1.0, 2.0) == doctest::Approx(0.25 * std::tanh(1.0)));
  // branch switch near |c| = 1e-4 must be seamless
  CHECK(pg_mean(2.0, 0.99e-4) == doctest::Approx(pg_mean(2.0, 1.01e-4)).epsilon(1e-10));
  CHECK(pg_var(2.0, 0.99e-4) == doctest::Approx(pg_var(2.0, 1.01e-4)).epsilon(1e-8));
  // negative c is symmetric
  CHECK(pg_mean(1.5, -2.0) == pg_mean(1.5, 2.0));
  CHECK(pg_var(1.5, -2.0) == pg_var(1.5, 2.0));
}

TEST_CASE("additivity: PG(2,0) equals PG(1,0)+PG(1,0) by two-sample KS") {
  const std::size_t n = 10000;
  RngStream r(777, 0);
  std::vector<double> a(n), s(n);
  for (auto& v : a) v = pg_draw(r, 2.0, 0.0);
  for (auto& v : s) v = pg_draw(r, 1.0, 0.0) + pg_draw(r, 1.0, 0.0);
  const double d = ks2(a, s);
  const double crit = 1.628 * std::sqrt(2.0 / n);  // alpha = 0.01
  CHECK(d < crit);
}

TEST_CASE("small-b draws match the series density (one-sample KS)") {
  const double cases[][2] = {{0.5, 1.0}, {0.3, 0.0}, {0.8, 3.0}};
  std::uint64_t stream = 40;
  for (const auto& bc : cases) {
    const double b = bc[0], c = bc[1];
    CAPTURE(b);
    CAPTURE(c);
    const std::size_t n = 10000;
    RngStream r(2718, stream++);
    std::vector<double> x(n);
    for (auto& v : x) v = pg_draw(r, b, c);
    std::sort(x.begin(), x.end());
    const double hi = x.back() * 1.5;
    auto tab = oracle::tabulate([&](double w) { return oracle::pg_density(w, b, c); },
                                1e-12, hi, 40001);
    auto cdf = oracle::cdf_grid(tab);
    const double dx = tab.x[1] - tab.x[0];
    double d = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double emp_hi = static_cast<double>(i + 1) / n;
      const double emp_lo = static_cast<double>(i) / n;
      std::size_t k = static_cast<std::size_t>((x[i] - tab.x[0]) / dx);
      if (k >= cdf.size()) k = cdf.size() - 1;
      d = std::max(d, std::fabs(emp_hi - cdf[k]));
      d = std::max(d, std::fabs(emp_lo - cdf[k]));
    }
    const double crit = 1.628 / std::sqrt(static_cast<double>(n));
    CHECK(d < crit);
  }
}

TEST_CASE("fractional decomposition path: b = 1.7") {
  const auto mc = draw_moments(1.7, 1.0, 100000, 90);
  CHECK(std::fabs(mc.mean - pg_mean(1.7, 1.0)) <= 3.0 * mc.se_mean);
  CHECK(std::fabs(mc.var - pg_var(1.7, 1.0)) <= 3.0 * mc.se_var);
}

TEST_CASE("gamma-series path used for large b keeps exact mean") {
  const auto mc = draw_moments(60.0, 2.0, 50000, 91);
  CHECK(std::fabs(mc.mean - pg_mean(60.0, 2.0)) <= 3.0 * mc.se_mean);
  CHECK(std::fabs(mc.var - pg_var(60.0, 2.0)) <= 3.0 * mc.se_var);
}

TEST_CASE("draws are reproducible and positive") {
  RngStream a(1, 2), b(1, 2);
  for (int i = 0; i < 200; ++i) {
    const double x = pg_draw(a, 0.7, 1.3);
    CHECK(x == pg_draw(b, 0.7, 1.3));
    CHECK(x > 0.0);
  }
}

TEST_CASE("domain errors") {
  RngStream r(3, 3);
  CHECK_THROWS_AS(pg_draw(r, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(pg_draw(r, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(pg_draw(r, 1.0, std::nan("")), DomainError);
  CHECK_THROWS_AS(pg_mean(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(pg_var(-2.0, 1.0), DomainError);
}
