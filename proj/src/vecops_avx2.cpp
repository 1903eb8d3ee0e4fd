// AVX2+FMA backend.  This TU alone is compiled with -mavx2 -mfma; nothing
// here may be called unless cpu_has_avx2() is true.

#include <immintrin.h>

#include <cstddef>

#include "hrdd/vecops.hpp"

namespace hrdd::vecops {

namespace {

inline double hadd(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  double acc = hadd(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  double acc = hadd(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double dot3_avx2(const double* x, const double* y, const double* z, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_fmadd_pd(xy, _mm256_loadu_pd(z + i), acc);
  }
  double s = hadd(acc);
  for (; i < n; ++i) s += x[i] * y[i] * z[i];
  return s;
}

double dot4_avx2(const double* w, const double* x, const double* y,
                 const double* z, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
    __m256d yz = _mm256_mul_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(z + i));
    acc = _mm256_fmadd_pd(wx, yz, acc);
  }
  double s = hadd(acc);
  for (; i < n; ++i) s += w[i] * x[i] * y[i] * z[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void mul_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void residual_avx2(const double* y, const double* w, double tau,
                   const double* zb, double* e, std::size_t n) {
  const __m256d tv = _mm256_set1_pd(tau);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_fnmadd_pd(tv, _mm256_loadu_pd(w + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(e + i, _mm256_sub_pd(t, _mm256_loadu_pd(zb + i)));
  }
  for (; i < n; ++i) e[i] = y[i] - tau * w[i] - zb[i];
}

constexpr Ops kAvx2Ops{sum_avx2, dot_avx2,  dot3_avx2,    dot4_avx2,
                       axpy_avx2, mul_avx2, residual_avx2};

}  // namespace

const Ops* avx2_ops() { return cpu_has_avx2() ? &kAvx2Ops : nullptr; }

}  // namespace hrdd::vecops
