#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "corrnoise/coeffs.hpp"
#include "corrnoise/spectral.hpp"

// Lower-triangular Toeplitz operator algebra: inversion by deconvolution,
// finite-horizon and limiting sensitivity, DTFT evaluation, and streaming
// application of the correlated-noise operator B.
namespace corrnoise::toeplitz {

struct InverseSeq {
  std::vector<double> values;  // first column of B^{-1}
};

// c_0 = 1/beta_0; c_t = -(1/beta_0) * sum_{k=1..t} beta_k c_{t-k}.
// The inverse of a lower-triangular Toeplitz operator is again
// lower-triangular Toeplitz, so the first column determines it.
InverseSeq invert_first_column(const coeffs::CoeffSeq& beta);

// gamma_T(beta) = ||c||_2: column 0 of B^{-1} has the largest norm, so the
// max over columns collapses to the first inverse column.
double sensitivity_T(const coeffs::CoeffSeq& beta);

// gamma_t for t = 1..T in one pass (prefix property of the triangular
// Toeplitz inverse: the order-t inverse is a prefix of the order-T one).
std::vector<double> sensitivity_prefix(const coeffs::CoeffSeq& beta);

// Newton power-series inversion (c <- c(2 - beta*c) with FFT convolutions),
// O(T log T); agrees with invert_first_column up to roundoff and makes
// horizon-length sensitivities affordable for simulation runs.
InverseSeq invert_first_column_fast(const coeffs::CoeffSeq& beta);
double sensitivity_T_fast(const coeffs::CoeffSeq& beta);

// |sum_t beta_t e^{-iwt}|^2 accumulated in complex arithmetic.
double dtft_magnitude_sq(const coeffs::CoeffSeq& beta, double omega);

// Limiting sensitivity ((1/2pi) * int |B(w)|^{-2} dw)^{1/2}. The integrand
// may have an integrable singularity at w = 0; dyadic shells toward 0 are
// refined adaptively. A divergent integral is reported as +infinity (the
// overflow guard 1e12 bounds both node values and the accumulated integral);
// callers must handle the infinite outcome.
double sensitivity_inf(const spectral::Fn& bmagsq,
                       const spectral::QuadratureSpec& quad);

// Streaming application of B: at step t emits sum_{tau<=t} beta_tau w_{t-tau}
// over d-dimensional raw draws. Keeps full history by default; a truncation
// window w > 0 drops terms with tau >= w. Single-owner mutable state.
class NoiseStream {
 public:
  NoiseStream(coeffs::CoeffSeq beta, std::size_t dim, std::size_t horizon,
              std::size_t window = 0);

  // Appends raw_draw to the history and writes the correlated value for the
  // current step into out. Throws std::out_of_range past the horizon.
  void step(std::span<const double> raw_draw, std::span<double> out);

  std::size_t t() const { return t_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t dim() const { return dim_; }

 private:
  coeffs::CoeffSeq beta_;
  std::size_t dim_;
  std::size_t horizon_;
  std::size_t window_;  // effective history length (ring capacity)
  std::size_t t_ = 0;
  std::vector<double> history_;  // ring buffer, window_ rows of dim_
};

}  // namespace corrnoise::toeplitz
