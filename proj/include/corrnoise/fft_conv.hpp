#pragma once

#include <cstddef>
#include <span>
#include <vector>

// FFT-based linear convolution (FFTW, deterministic ESTIMATE plans). Used to
// apply the full Toeplitz noise operator to long runs in O(T log T) per
// coordinate; equivalent to the streaming application up to floating-point
// reassociation (tested).
namespace corrnoise::fft_conv {

// Reusable convolver for a fixed kernel and signal length: out[t] =
// sum_{tau<=t} kernel[tau] * signal[t-tau], t = 0..n-1.
class Convolver {
 public:
  Convolver(std::span<const double> kernel, std::size_t n);
  ~Convolver();
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  std::size_t signal_length() const { return n_; }

  // out may alias signal.
  void apply(std::span<const double> signal, std::span<double> out);

 private:
  std::size_t n_;
  std::size_t fft_n_;
  std::vector<double> kernel_spectrum_;  // interleaved re/im halfcomplex
  std::vector<double> work_;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
  std::vector<double> buf_real_;
  std::vector<double> buf_cplx_;  // fftw_complex storage
};

// One-shot convenience wrapper.
void convolve_prefix(std::span<const double> kernel,
                     std::span<const double> signal, std::span<double> out);

}  // namespace corrnoise::fft_conv
