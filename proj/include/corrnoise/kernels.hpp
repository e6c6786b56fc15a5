#pragma once

#include <cstddef>

// Data-parallel inner-loop kernels. Scalar reference implementations live in
// kernels_scalar.cpp; AVX2 (x86-64) and NEON (aarch64) variants are selected
// at runtime by the dispatcher. All variants must agree with the scalar
// reference up to floating-point reassociation; see tests/test_kernels.cpp.
namespace corrnoise::kernels {

struct Ops {
  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += c*x[i]
  void (*axpy)(double* y, double c, const double* x, std::size_t n);
  // sum_i a[i]^2
  double (*nrm2sq)(const double* a, std::size_t n);
  // sum_i w[i]*(a[i]-b[i])^2
  double (*weighted_sqdist)(const double* w, const double* a, const double* b,
                            std::size_t n);
  // acc[i] += sum_r c[r]*rows[r*stride + i]   (row-block accumulate)
  void (*conv_acc)(double* acc, std::size_t n, const double* c,
                   const double* rows, std::size_t stride, std::size_t nrows);
  // y[i] = y[i]*s + x[i]*c
  void (*scale_add)(double* y, double s, const double* x, double c,
                    std::size_t n);
};

// Kernels for the current backend (resolved once, see force_backend).
const Ops& ops();

// Scalar reference kernels, always available.
const Ops& scalar_ops();

// Name of the active backend: "scalar", "avx2", or "neon".
const char* backend_name();

// Override backend selection: "scalar", "avx2", "neon", or "auto".
// Returns false if the requested backend is unavailable on this machine.
// The CORRNOISE_SIMD environment variable applies the same override at
// startup.
bool force_backend(const char* name);

}  // namespace corrnoise::kernels
