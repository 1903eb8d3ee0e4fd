#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hrdd/errors.hpp"
#include "hrdd/rng.hpp"

using namespace hrdd;

namespace {

constexpr std::size_t kN = 100000;

struct SampleStats {
  double mean;
  double se_mean;   // sd / sqrt(n)
  double var;
  double se_var;    // sd of squared deviations / sqrt(n)
};

template <typename Draw>
SampleStats stats(Draw draw, std::size_t n = kN) {
  std::vector<double> x(n);
  for (auto& v : x) v = draw();
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
  const double var_of_sq = s4 / n - var * var;
  return {m, std::sqrt(var / n), var, std::sqrt(var_of_sq / n)};
}

void check_mean(const SampleStats& s, double want) {
  CHECK(std::fabs(s.mean - want) <= 3.0 * s.se_mean);
}
void check_var(const SampleStats& s, double want) {
  CHECK(std::fabs(s.var - want) <= 3.0 * s.se_var);
}

}  // namespace

TEST_CASE("identical (seed, stream) reproduces the sequence exactly") {
  RngStream a(123, 7), b(123, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(123, 8);
  int same = 0;
  RngStream a2(123, 7);
  for (int i = 0; i < 1000; ++i) same += (a2.next_u64() == c.next_u64());
  CHECK(same < 5);
}

TEST_CASE("fork is deterministic and tag-sensitive") {
  RngStream base(99, 1);
  RngStream c1 = base.fork(17);
  RngStream c2 = base.fork(17);
  RngStream c3 = base.fork(18);
  CHECK(c1.stream() == c2.stream());
  CHECK(c1.stream() != c3.stream());
  for (int i = 0; i < 100; ++i) CHECK(c1.next_u64() == c2.next_u64());
  // forking does not disturb the parent
  RngStream base2(99, 1);
  base2.fork(5);
  RngStream base3(99, 1);
  CHECK(base2.next_u64() == base3.next_u64());
}

TEST_CASE("uniform01 range and moments") {
  RngStream r(2024, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  RngStream r2(2024, 1);
  auto s = stats([&] { return r2.uniform01(); });
  check_mean(s, 0.5);
  check_var(s, 1.0 / 12.0);

  RngStream r3(2024, 2);
  for (int i = 0; i < 10000; ++i) {
    const double u = r3.unit_open();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  RngStream r(5, 0);
  auto s = stats([&] { return r.normal(); });
  check_mean(s, 0.0);
  check_var(s, 1.0);

  RngStream r2(5, 1);
  auto s2 = stats([&] { return r2.normal(2.0, 3.0); });
  check_mean(s2, 2.0);
  check_var(s2, 9.0);

  // degenerate-variance limit
  RngStream r3(5, 2);
  CHECK(std::fabs(r3.normal(0.0, 1e-12)) < 1e-9);
}

TEST_CASE("gamma moments, both shape regimes") {
  RngStream r(6, 0);
  auto s = stats([&] { return r.gamma_rate(3.0, 2.0); });
  check_mean(s, 1.5);
  check_var(s, 0.75);

  RngStream r2(6, 1);
  auto s2 = stats([&] { return r2.gamma_rate(0.5, 1.0); });
  check_mean(s2, 0.5);
  check_var(s2, 0.5);
}

TEST_CASE("inverse gamma mean matches rate/(shape-1)") {
  RngStream r(7, 0);
  auto s = stats([&] { return r.inv_gamma(3.0, 2.0); });
  check_mean(s, 1.0);

  RngStream r2(7, 1);
  auto s2 = stats([&] { return r2.inv_gamma(5.0, 8.0); });
  check_mean(s2, 2.0);
}

TEST_CASE("beta moments") {
  RngStream r(8, 3);
  auto s = stats([&] { return r.beta(2.0, 4.0); });
  check_mean(s, 1.0 / 3.0);
  check_var(s, 2.0 * 4.0 / (36.0 * 7.0));

  RngStream r2(8, 1);
  auto s2 = stats([&] { return r2.beta(0.5, 0.5); });
  check_mean(s2, 0.5);
}

TEST_CASE("bernoulli frequency") {
  RngStream r(9, 0);
  auto s = stats([&] { return r.bernoulli(0.3) ? 1.0 : 0.0; });
  check_mean(s, 0.3);
  RngStream r2(9, 1);
  CHECK(r2.bernoulli(0.0) == false);
  CHECK(r2.bernoulli(1.0) == true);
}

TEST_CASE("exponential, student t, inverse gaussian moments") {
  RngStream r(10, 0);
  auto s = stats([&] { return r.exponential(2.0); });
  check_mean(s, 0.5);

  RngStream r2(10, 1);
  auto s2 = stats([&] { return r2.student_t(3.0); });
  check_mean(s2, 0.0);

  RngStream r3(10, 2);
  auto s3 = stats([&] { return r3.inverse_gaussian(2.0, 3.0); });
  check_mean(s3, 2.0);
  check_var(s3, 8.0 / 3.0);
}

TEST_CASE("domain errors") {
  RngStream r(11, 0);
  CHECK_THROWS_AS(r.gamma_rate(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(r.gamma_rate(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(r.inv_gamma(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(r.bernoulli(1.5), DomainError);
  CHECK_THROWS_AS(r.bernoulli(-0.1), DomainError);
  CHECK_THROWS_AS(r.exponential(0.0), DomainError);
  CHECK_THROWS_AS(r.student_t(0.0), DomainError);
  CHECK_THROWS_AS(r.inverse_gaussian(-2.0, 1.0), DomainError);
  CHECK_THROWS_AS(r.uniform(2.0, 2.0), DomainError);
}
