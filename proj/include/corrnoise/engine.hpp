#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "corrnoise/coeffs.hpp"

// The optimizer loop: gradient step with correlated Gaussian noise, optional
// l2 clipping (clipping on = private run, off = the analytically tractable
// variant), plus the privacy accountant.
namespace corrnoise::engine {

// Projection of g onto the l2 ball of radius G. Returns g unchanged (no
// arithmetic applied) when ||g|| <= G.
std::vector<double> clip(std::span<const double> g, double G);

// sigma_DP = gamma_T(beta) / sqrt(2*rho). rho may be +infinity to disable
// the DP noise entirely.
double noise_multiplier(const coeffs::CoeffSeq& beta, double rho);

// (eps, delta)-DP level implied by rho-zCDP:
//   eps = inf_{alpha>1} { rho*alpha + log(1/(alpha*delta))/(alpha-1)
//                         + log(1 - 1/alpha) },
// minimized by a coarse scan plus golden-section refinement over log(alpha)
// in [1e-6, 40]; clamped at 0 from below.
double zcdp_to_eps(double rho, double delta);

// Stochastic gradient source. Implementations own their data stream and are
// deterministic given (seed, t, theta).
struct GradOracle {
  virtual ~GradOracle() = default;
  virtual void grad(std::span<const double> theta, std::uint64_t t,
                    std::span<double> out) = 0;
};

struct RunConfig {
  std::size_t T = 0;
  double eta = 0.0;
  double G = 1.0;            // noise scale and (when enabled) clip norm
  bool clip_enabled = true;  // off = non-private run
  double rho = 1.0;
  coeffs::CoeffSeq beta;
  std::size_t d = 0;
  std::uint64_t seed = 0;
  std::size_t log_stride = 16;    // metric sampling stride outside the tail
  std::size_t dense_tail = 0;     // 0 -> T/4: dense metric logging window
  std::size_t noise_window = 0;   // 0 -> full history
  std::optional<double> sigma_dp; // override; default noise_multiplier(beta, rho)
  bool snapshot_iterates = false;
};

struct IterateLog {
  std::vector<std::size_t> steps;
  std::vector<double> metric;
  std::vector<std::size_t> snapshot_steps;
  std::vector<std::vector<double>> snapshots;
  std::vector<double> final_theta;
  double sigma_dp = 0.0;
  bool is_private = false;  // false when clipping was disabled
};

struct divergence_error : std::runtime_error {
  explicit divergence_error(std::size_t at_step)
      : std::runtime_error("non-finite iterate at step " +
                           std::to_string(at_step)),
        step(at_step) {}
  std::size_t step;
};

using Metric = std::function<double(std::span<const double>)>;
// Supplies the sigma-scaled correlated noise for step t. When empty, run()
// builds the default provider: counter-RNG raw draws through a NoiseStream.
using NoiseProvider = std::function<void(std::size_t, std::span<double>)>;
// Test hook observing the injected noise per step.
using NoiseTap = std::function<void(std::size_t, std::span<const double>)>;

IterateLog run(GradOracle& oracle, const RunConfig& cfg,
               const Metric& metric = {}, const NoiseProvider& provider = {},
               const NoiseTap& tap = {});

}  // namespace corrnoise::engine
