#include "corrnoise/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "corrnoise/fft_conv.hpp"
#include "corrnoise/kernels.hpp"

namespace corrnoise::toeplitz {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOverflowGuard = 1e12;

}  // namespace

InverseSeq invert_first_column(const coeffs::CoeffSeq& beta) {
  if (beta.size() == 0) throw std::invalid_argument("empty coefficient sequence");
  if (beta[0] == 0.0) {
    throw std::invalid_argument("invert_first_column: beta_0 must be nonzero");
  }
  const std::size_t T = beta.size();
  InverseSeq inv;
  inv.values.resize(T);
  const double inv0 = 1.0 / beta[0];
  inv.values[0] = inv0;
  for (std::size_t t = 1; t < T; ++t) {
    double s = 0.0;
    for (std::size_t k = 1; k <= t; ++k) s += beta[k] * inv.values[t - k];
    inv.values[t] = -inv0 * s;
  }
  return inv;
}

double sensitivity_T(const coeffs::CoeffSeq& beta) {
  const InverseSeq c = invert_first_column(beta);
  return std::sqrt(
      kernels::ops().nrm2sq(c.values.data(), c.values.size()));
}

std::vector<double> sensitivity_prefix(const coeffs::CoeffSeq& beta) {
  const InverseSeq c = invert_first_column(beta);
  std::vector<double> out(c.values.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < c.values.size(); ++t) {
    acc += c.values[t] * c.values[t];
    out[t] = std::sqrt(acc);
  }
  return out;
}

InverseSeq invert_first_column_fast(const coeffs::CoeffSeq& beta) {
  if (beta.size() == 0) throw std::invalid_argument("empty coefficient sequence");
  if (beta[0] == 0.0) {
    throw std::invalid_argument("invert_first_column_fast: beta_0 nonzero");
  }
  const std::size_t T = beta.size();
  if (T <= 2048) return invert_first_column(beta);

  std::vector<double> c{1.0 / beta[0]};
  while (c.size() < T) {
    const std::size_t m2 = std::min(2 * c.size(), T);
    // e = beta * c mod z^m2, then c' = 2c - c * e mod z^m2.
    std::vector<double> kernel(beta.values.begin(),
                               beta.values.begin() +
                                   std::min(beta.size(), m2));
    std::vector<double> c_pad(m2, 0.0);
    std::copy(c.begin(), c.end(), c_pad.begin());
    std::vector<double> e(m2);
    fft_conv::convolve_prefix(kernel, c_pad, e);
    std::vector<double> ce(m2);
    fft_conv::convolve_prefix(c_pad, e, ce);
    std::vector<double> next(m2);
    for (std::size_t t = 0; t < m2; ++t) next[t] = 2.0 * c_pad[t] - ce[t];
    c = std::move(next);
  }
  return InverseSeq{std::move(c)};
}

double sensitivity_T_fast(const coeffs::CoeffSeq& beta) {
  const InverseSeq c = invert_first_column_fast(beta);
  return std::sqrt(kernels::ops().nrm2sq(c.values.data(), c.values.size()));
}

double dtft_magnitude_sq(const coeffs::CoeffSeq& beta, double omega) {
  // Fixed convention exp(-i w t); only |B| enters downstream formulas.
  const std::complex<double> step(std::cos(omega), -std::sin(omega));
  std::complex<double> z(1.0, 0.0);
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t t = 0; t < beta.size(); ++t) {
    acc += beta[t] * z;
    z *= step;
  }
  return std::norm(acc);
}

double sensitivity_inf(const spectral::Fn& bmagsq,
                       const spectral::QuadratureSpec& quad) {
  const double inf = std::numeric_limits<double>::infinity();
  // Node values past the overflow guard mark the integral divergent; the
  // flag is checked after every piece because a huge node in a microscopic
  // shell barely moves the accumulated integral.
  bool node_over = false;
  auto g = [&](double w) {
    const double b2 = bmagsq(w);
    if (!(b2 > 0.0) || 1.0 / b2 >= kOverflowGuard) {
      node_over = true;
      return kOverflowGuard;
    }
    return 1.0 / b2;
  };

  // Outer region [w0, pi] on both sides with the base composite rule.
  const double w0 = kPi / 64.0;
  auto outer_piece = [&](double lo, double hi) {
    const int panels = std::max(16, quad.panel_count / 2);
    double s = 0.0;
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      s += spectral::integrate_adaptive(g, lo + p * width,
                                        lo + (p + 1) * width, quad.abs_tol, 6);
    }
    return s;
  };
  double total = outer_piece(w0, kPi) + outer_piece(-kPi, -w0);
  if (node_over || total > kOverflowGuard) return inf;

  // Dyadic shells [w/2, w] toward 0, mirrored. An integrable singularity
  // eventually flattens at the scale where |B|^2 stops shrinking, after
  // which the shell sums halve per level and the loop terminates on
  // abs_tol. Divergent integrands (1/w and worse) keep growing pointwise
  // until a node value or the accumulated total crosses the overflow
  // guard; a 1/w profile reaches it after ~36 shells.
  double hi = w0;
  bool converged = false;
  for (int level = 0; level < 120; ++level) {
    const double lo = 0.5 * hi;
    double shell = 0.0;
    for (double sign : {1.0, -1.0}) {
      const double a = sign > 0 ? lo : -hi;
      const double b = sign > 0 ? hi : -lo;
      shell += spectral::integrate_adaptive(g, a, b, quad.abs_tol, 8);
    }
    total += shell;
    if (node_over || total > kOverflowGuard) return inf;
    if (shell < quad.abs_tol) {
      // Remaining tail is bounded by a geometric extrapolation.
      converged = true;
      break;
    }
    hi = lo;
  }
  if (!converged) return inf;
  const double g2 = total / (2.0 * kPi);
  if (!(g2 < kOverflowGuard)) return inf;
  return std::sqrt(g2);
}

NoiseStream::NoiseStream(coeffs::CoeffSeq beta, std::size_t dim,
                         std::size_t horizon, std::size_t window)
    : beta_(std::move(beta)), dim_(dim), horizon_(horizon) {
  if (beta_.size() == 0 || beta_[0] == 0.0) {
    throw std::invalid_argument("NoiseStream: beta_0 must be nonzero");
  }
  if (dim_ == 0) throw std::invalid_argument("NoiseStream: dim must be >= 1");
  const std::size_t full = std::min(horizon_, beta_.size());
  window_ = window == 0 ? full : std::min(window, full);
  if (window_ == 0) window_ = 1;
  history_.assign(window_ * dim_, 0.0);
}

void NoiseStream::step(std::span<const double> raw_draw,
                       std::span<double> out) {
  if (t_ >= horizon_) {
    throw std::out_of_range("NoiseStream: stepped past the horizon");
  }
  if (raw_draw.size() != dim_ || out.size() != dim_) {
    throw std::invalid_argument("NoiseStream: dimension mismatch");
  }
  // Ring slot for step t.
  const std::size_t slot = t_ % window_;
  std::copy(raw_draw.begin(), raw_draw.end(), history_.begin() + slot * dim_);

  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t terms =
      std::min({t_ + 1, window_, beta_.size()});
  // out += sum_{tau < terms} beta_tau * w_{t-tau}; the ring makes the rows
  // for tau = 0.. wrap at most once, handled as two contiguous blocks.
  const auto& ops = kernels::ops();
  // Row of w_{t-tau} lives at slot (t-tau) mod window_. Walking tau upward
  // from 0 means walking slots downward from `slot`.
  const std::size_t first_block = std::min(terms, slot + 1);
  // Block 1: tau in [0, first_block), slots slot-tau descending and
  // contiguous in memory when read with negative stride; accumulate per row.
  for (std::size_t tau = 0; tau < first_block; ++tau) {
    ops.axpy(out.data(), beta_[tau], history_.data() + (slot - tau) * dim_,
             dim_);
  }
  // Block 2: wrapped slots at the high end of the ring.
  if (terms > first_block) {
    const std::size_t rest = terms - first_block;
    const double* rows = history_.data() + (window_ - rest) * dim_;
    // tau = slot+1 maps to the last row of the ring, tau = slot+rest to the
    // first row of the block; reverse coefficient order to use one block op.
    for (std::size_t j = 0; j < rest; ++j) {
      ops.axpy(out.data(), beta_[slot + 1 + j],
               rows + (rest - 1 - j) * dim_, dim_);
    }
  }
  ++t_;
}

}  // namespace corrnoise::toeplitz
