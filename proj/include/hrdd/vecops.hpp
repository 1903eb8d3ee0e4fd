#pragma once

#include <cstddef>

// Dense double-precision loops the samplers lean on.  A scalar reference
// backend always exists; an AVX2 backend is compiled when the toolchain
// supports it and picked at runtime when the CPU does.  Override with
// HRDD_VECOPS=scalar|avx2 in the environment.

namespace hrdd::vecops {

struct Ops {
  double (*sum)(const double* x, std::size_t n);
  // sum x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum x[i] * y[i] * z[i]
  double (*dot3)(const double* x, const double* y, const double* z, std::size_t n);
  // sum w[i] * x[i] * y[i] * z[i]
  double (*dot4)(const double* w, const double* x, const double* y,
                 const double* z, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out[i] = x[i] * y[i]
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  // e[i] = y[i] - tau * w[i] - zb[i]
  void (*residual)(const double* y, const double* w, double tau,
                   const double* zb, double* e, std::size_t n);
};

const Ops& scalar_ops();
// nullptr when the AVX2 translation unit was not built or the CPU lacks AVX2/FMA.
const Ops* avx2_ops();
bool cpu_has_avx2();

// Active backend: resolved once per process from CPU + HRDD_VECOPS.
const Ops& ops();
const char* backend_name();  // "scalar" or "avx2"

inline double sum(const double* x, std::size_t n) { return ops().sum(x, n); }
inline double dot(const double* x, const double* y, std::size_t n) {
  return ops().dot(x, y, n);
}
inline double dot3(const double* x, const double* y, const double* z, std::size_t n) {
  return ops().dot3(x, y, z, n);
}
inline double dot4(const double* w, const double* x, const double* y,
                   const double* z, std::size_t n) {
  return ops().dot4(w, x, y, z, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  ops().axpy(a, x, y, n);
}
inline void mul(const double* x, const double* y, double* out, std::size_t n) {
  ops().mul(x, y, out, n);
}
inline void residual(const double* y, const double* w, double tau,
                     const double* zb, double* e, std::size_t n) {
  ops().residual(y, w, tau, zb, e, n);
}

}  // namespace hrdd::vecops
