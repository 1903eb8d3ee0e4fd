#pragma once

#include <cstdint>

// Counter-free deterministic RNG: xoshiro256++ seeded from (seed, stream)
// through splitmix64.  Samplers fork one child stream per (sweep, block,
// group) so results never depend on thread count or update interleaving.

namespace hrdd {

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  // Same seed, child stream derived from (stream, tag).  Deterministic;
  // independent tags give decorrelated children.
  RngStream fork(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64();
  double uniform01();   // [0, 1), 53-bit
  double unit_open();   // (0, 1)
  double uniform(double lo, double hi);
  bool bernoulli(double p);

  double normal(double mean = 0.0, double sd = 1.0);
  double exponential(double rate);
  // shape/rate; density ~ x^{a-1} e^{-b x}
  double gamma_rate(double shape, double rate);
  // shape/rate; density ~ x^{-a-1} e^{-b/x}, mean b/(a-1)
  double inv_gamma(double shape, double rate);
  double beta(double a, double b);
  double student_t(double df);
  double inverse_gaussian(double mu, double lambda);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t s_[4];
};

// Stateless splitmix64 finalizer; also used to derive per-replication seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace hrdd
