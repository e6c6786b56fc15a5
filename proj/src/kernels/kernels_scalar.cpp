#include "corrnoise/kernels.hpp"

namespace corrnoise::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double* y, double c, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += c * x[i];
}

double nrm2sq_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double weighted_sqdist_scalar(const double* w, const double* a,
                              const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += w[i] * d * d;
  }
  return s;
}

void conv_acc_scalar(double* acc, std::size_t n, const double* c,
                     const double* rows, std::size_t stride,
                     std::size_t nrows) {
  for (std::size_t r = 0; r < nrows; ++r) {
    const double cr = c[r];
    const double* row = rows + r * stride;
    for (std::size_t i = 0; i < n; ++i) acc[i] += cr * row[i];
  }
}

void scale_add_scalar(double* y, double s, const double* x, double c,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] * s + x[i] * c;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops k = {dot_scalar,     axpy_scalar,     nrm2sq_scalar,
                        weighted_sqdist_scalar, conv_acc_scalar, scale_add_scalar};
  return k;
}

}  // namespace corrnoise::kernels
