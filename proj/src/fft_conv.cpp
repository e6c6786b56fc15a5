#include "corrnoise/fft_conv.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace corrnoise::fft_conv {
namespace {

// FFTW plan creation is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

Convolver::Convolver(std::span<const double> kernel, std::size_t n) : n_(n) {
  if (kernel.empty() || n == 0) {
    throw std::invalid_argument("Convolver: empty kernel or signal length");
  }
  const std::size_t klen = std::min(kernel.size(), n);
  fft_n_ = next_pow2(n + klen);
  buf_real_.assign(fft_n_, 0.0);
  buf_cplx_.assign(2 * (fft_n_ / 2 + 1), 0.0);

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_fwd_ = fftw_plan_dft_r2c_1d(
        static_cast<int>(fft_n_), buf_real_.data(),
        reinterpret_cast<fftw_complex*>(buf_cplx_.data()), FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r_1d(
        static_cast<int>(fft_n_),
        reinterpret_cast<fftw_complex*>(buf_cplx_.data()), buf_real_.data(),
        FFTW_ESTIMATE);
  }
  if (plan_fwd_ == nullptr || plan_inv_ == nullptr) {
    throw std::runtime_error("Convolver: FFTW plan creation failed");
  }

  std::fill(buf_real_.begin(), buf_real_.end(), 0.0);
  std::copy(kernel.begin(), kernel.begin() + klen, buf_real_.begin());
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  kernel_spectrum_ = buf_cplx_;
}

Convolver::~Convolver() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void Convolver::apply(std::span<const double> signal, std::span<double> out) {
  if (signal.size() != n_ || out.size() != n_) {
    throw std::invalid_argument("Convolver: length mismatch");
  }
  std::fill(buf_real_.begin(), buf_real_.end(), 0.0);
  std::copy(signal.begin(), signal.end(), buf_real_.begin());
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));

  const std::size_t half = fft_n_ / 2 + 1;
  const double scale = 1.0 / static_cast<double>(fft_n_);
  for (std::size_t j = 0; j < half; ++j) {
    const double ar = buf_cplx_[2 * j], ai = buf_cplx_[2 * j + 1];
    const double br = kernel_spectrum_[2 * j], bi = kernel_spectrum_[2 * j + 1];
    buf_cplx_[2 * j] = (ar * br - ai * bi) * scale;
    buf_cplx_[2 * j + 1] = (ar * bi + ai * br) * scale;
  }
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  std::copy(buf_real_.begin(), buf_real_.begin() + n_, out.begin());
}

void convolve_prefix(std::span<const double> kernel,
                     std::span<const double> signal, std::span<double> out) {
  Convolver conv(kernel, signal.size());
  conv.apply(signal, out);
}

}  // namespace corrnoise::fft_conv
