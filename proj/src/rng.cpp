#include "hrdd/rng.hpp"

#include <cmath>

#include "hrdd/errors.hpp"

namespace hrdd {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  // splitmix64 chain over seed, offset by the scrambled stream id
  std::uint64_t x = seed ^ mix64(stream);
  for (auto& s : s_) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    s = z ^ (z >> 31);
  }
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9E3779B97F4A7C15ull;
}

RngStream RngStream::fork(std::uint64_t tag) const {
  return RngStream(seed_, mix64(stream_ ^ mix64(tag)));
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::unit_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (!(lo < hi)) throw DomainError("uniform: need lo < hi");
  return lo + (hi - lo) * uniform01();
}

bool RngStream::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bernoulli: p outside [0,1]");
  return uniform01() < p;
}

double RngStream::normal(double mean, double sd) {
  // Marsaglia polar; the spare is discarded so call positions stay aligned
  // across code paths.
  for (;;) {
    const double u = 2.0 * uniform01() - 1.0;
    const double v = 2.0 * uniform01() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0)
      return mean + sd * (u * std::sqrt(-2.0 * std::log(s) / s));
  }
}

double RngStream::exponential(double rate) {
  if (!(rate > 0.0)) throw DomainError("exponential: rate must be > 0");
  return -std::log1p(-uniform01()) / rate;
}

double RngStream::gamma_rate(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw DomainError("gamma_rate: shape and rate must be > 0");
  if (shape < 1.0) {
    // boost a sub-unit shape: G(a) = G(a+1) * U^{1/a}
    const double g = gamma_rate(shape + 1.0, 1.0);
    return g * std::pow(unit_open(), 1.0 / shape) / rate;
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = unit_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double RngStream::inv_gamma(double shape, double rate) {
  return 1.0 / gamma_rate(shape, rate);
}

double RngStream::beta(double a, double b) {
  const double g1 = gamma_rate(a, 1.0);
  const double g2 = gamma_rate(b, 1.0);
  return g1 / (g1 + g2);
}

double RngStream::student_t(double df) {
  if (!(df > 0.0)) throw DomainError("student_t: df must be > 0");
  const double z = normal();
  const double g = gamma_rate(0.5 * df, 0.5);  // chi-square(df)
  return z / std::sqrt(g / df);
}

double RngStream::inverse_gaussian(double mu, double lambda) {
  if (!(mu > 0.0) || !(lambda > 0.0))
    throw DomainError("inverse_gaussian: mu and lambda must be > 0");
  if (mu > 1e8) {
    // Levy limit
    const double n = normal();
    return lambda / (n * n);
  }
  const double n = normal();
  const double y = n * n;
  const double x =
      mu + 0.5 * mu * mu * y / lambda -
      0.5 * (mu / lambda) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
  if (uniform01() <= mu / (mu + x)) return x;
  return mu * mu / x;
}

}  // namespace hrdd
