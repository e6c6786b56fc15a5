// NEON (aarch64) kernel variants; float64x2 lanes.
#include "corrnoise/kernels.hpp"

#include <arm_neon.h>

namespace corrnoise::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(acc0) + vaddvq_f64(acc1);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double* y, double c, const double* x, std::size_t n) {
  const float64x2_t cv = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t yv = vld1q_f64(y + i);
    yv = vfmaq_f64(yv, cv, vld1q_f64(x + i));
    vst1q_f64(y + i, yv);
  }
  for (; i < n; ++i) y[i] += c * x[i];
}

double nrm2sq_neon(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(a + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double weighted_sqdist_neon(const double* w, const double* a, const double* b,
                            std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, vmulq_f64(vld1q_f64(w + i), d), d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += w[i] * d * d;
  }
  return s;
}

void conv_acc_neon(double* acc, std::size_t n, const double* c,
                   const double* rows, std::size_t stride, std::size_t nrows) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t a = vld1q_f64(acc + i);
    for (std::size_t r = 0; r < nrows; ++r) {
      a = vfmaq_f64(a, vdupq_n_f64(c[r]), vld1q_f64(rows + r * stride + i));
    }
    vst1q_f64(acc + i, a);
  }
  for (; i < n; ++i) {
    double s = acc[i];
    for (std::size_t r = 0; r < nrows; ++r) s += c[r] * rows[r * stride + i];
    acc[i] = s;
  }
}

void scale_add_neon(double* y, double s, const double* x, double c,
                    std::size_t n) {
  const float64x2_t sv = vdupq_n_f64(s);
  const float64x2_t cv = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t yv = vmulq_f64(vld1q_f64(y + i), sv);
    vst1q_f64(y + i, vfmaq_f64(yv, cv, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] = y[i] * s + x[i] * c;
}

}  // namespace

const Ops& neon_ops() {
  static const Ops k = {dot_neon,     axpy_neon,     nrm2sq_neon,
                        weighted_sqdist_neon, conv_acc_neon, scale_add_neon};
  return k;
}

}  // namespace corrnoise::kernels
