#include "hrdd/vecops.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "hrdd/errors.hpp"

namespace hrdd::vecops {

namespace {

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double dot3_scalar(const double* x, const double* y, const double* z, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i] * z[i];
  return acc;
}

double dot4_scalar(const double* w, const double* x, const double* y,
                   const double* z, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i] * z[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void mul_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void residual_scalar(const double* y, const double* w, double tau,
                     const double* zb, double* e, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) e[i] = y[i] - tau * w[i] - zb[i];
}

constexpr Ops kScalarOps{sum_scalar, dot_scalar,  dot3_scalar,    dot4_scalar,
                         axpy_scalar, mul_scalar, residual_scalar};

const Ops* resolve() {
  const char* env = std::getenv("HRDD_VECOPS");
  if (env != nullptr && env[0] != '\0') {
    const std::string want(env);
    if (want == "scalar") return &kScalarOps;
    if (want == "avx2") {
      const Ops* o = avx2_ops();
      if (o == nullptr)
        throw DomainError("HRDD_VECOPS=avx2 but AVX2+FMA is unavailable on this build/CPU");
      return o;
    }
    throw DomainError("HRDD_VECOPS must be 'scalar' or 'avx2', got '" + want + "'");
  }
  const Ops* o = avx2_ops();
  return o != nullptr ? o : &kScalarOps;
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#if !defined(HRDD_HAVE_AVX2_TU)
const Ops* avx2_ops() { return nullptr; }
#endif

const Ops& ops() {
  static const Ops* active = resolve();
  return *active;
}

const char* backend_name() { return &ops() == &kScalarOps ? "scalar" : "avx2"; }

}  // namespace hrdd::vecops
