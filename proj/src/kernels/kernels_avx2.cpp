// AVX2+FMA kernel variants. This file is compiled with -mavx2 -mfma; the
// dispatcher only routes here after a runtime cpuid check.
#include "corrnoise/kernels.hpp"

#include <immintrin.h>

namespace corrnoise::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double* y, double c, const double* x, std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(cv, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(cv, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    y0 = _mm256_fmadd_pd(cv, _mm256_loadu_pd(x + i), y0);
    _mm256_storeu_pd(y + i, y0);
  }
  for (; i < n; ++i) y[i] += c * x[i];
}

double nrm2sq_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double weighted_sqdist_avx2(const double* w, const double* a, const double* b,
                            std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), d), d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += w[i] * d * d;
  }
  return s;
}

// Accumulates rows in pairs so the accumulator tile stays in registers.
void conv_acc_avx2(double* acc, std::size_t n, const double* c,
                   const double* rows, std::size_t stride, std::size_t nrows) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(acc + i);
    std::size_t r = 0;
    for (; r + 2 <= nrows; r += 2) {
      a = _mm256_fmadd_pd(_mm256_set1_pd(c[r]),
                          _mm256_loadu_pd(rows + r * stride + i), a);
      a = _mm256_fmadd_pd(_mm256_set1_pd(c[r + 1]),
                          _mm256_loadu_pd(rows + (r + 1) * stride + i), a);
    }
    for (; r < nrows; ++r) {
      a = _mm256_fmadd_pd(_mm256_set1_pd(c[r]),
                          _mm256_loadu_pd(rows + r * stride + i), a);
    }
    _mm256_storeu_pd(acc + i, a);
  }
  for (; i < n; ++i) {
    double s = acc[i];
    for (std::size_t r = 0; r < nrows; ++r) s += c[r] * rows[r * stride + i];
    acc[i] = s;
  }
}

void scale_add_avx2(double* y, double s, const double* x, double c,
                    std::size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_mul_pd(_mm256_loadu_pd(y + i), sv);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(cv, _mm256_loadu_pd(x + i), yv));
  }
  for (; i < n; ++i) y[i] = y[i] * s + x[i] * c;
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops k = {dot_avx2,     axpy_avx2,     nrm2sq_avx2,
                        weighted_sqdist_avx2, conv_acc_avx2, scale_add_avx2};
  return k;
}

}  // namespace corrnoise::kernels
