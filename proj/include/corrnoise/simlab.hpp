#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "corrnoise/analysis.hpp"
#include "corrnoise/coeffs.hpp"
#include "corrnoise/engine.hpp"

// Problem generators and the experiment harness: stationary-error estimation
// at desk scale and log-log slope fits across dimension, eigenvalue decay,
// and learning-rate sweeps.
namespace corrnoise::simlab {

struct LinRegProblem {
  analysis::Spectrum spectrum;     // H diagonal in the canonical basis
  std::vector<double> theta_star;  // empty -> 0
  double sigma_sgd = 0.0;
  std::uint64_t seed = 0;
};

struct MeanEstProblem {
  double mean = 0.0;
  double sigma_sgd = 0.0;
  std::uint64_t seed = 0;
};

// Gradient oracles backed by counter-RNG data streams.
class LinRegOracle final : public engine::GradOracle {
 public:
  LinRegOracle(const LinRegProblem& problem, std::uint64_t seed);
  void grad(std::span<const double> theta, std::uint64_t t,
            std::span<double> out) override;

 private:
  std::vector<double> sqrt_lambda_;
  std::vector<double> theta_star_;
  std::vector<double> x_;
  double sigma_sgd_;
  std::uint64_t seed_;
};

class MeanEstOracle final : public engine::GradOracle {
 public:
  MeanEstOracle(const MeanEstProblem& problem, std::uint64_t seed);
  void grad(std::span<const double> theta, std::uint64_t t,
            std::span<double> out) override;

 private:
  double mean_;
  double sigma_sgd_;
  std::uint64_t seed_;
};

struct StationaryEstimate {
  double value = 0.0;
  double stderr_boot = 0.0;
  std::vector<double> per_trial;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log x, log y)
};

// OLS in log-log coordinates.
SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& xy);

// Average suboptimality over the last T/4 steps and over trials, with a
// bootstrap standard error over the trial means. Emits a warning on stderr
// when eta * R_sq >= 1 (outside the theory's range) but still runs.
// Divergence inside the engine propagates.
StationaryEstimate simulate_stationary(const LinRegProblem& problem,
                                       const coeffs::CoeffSeq& beta,
                                       const analysis::ProblemParams& params,
                                       std::size_t T, std::size_t trials);

// Same estimator for the one-dimensional mean-estimation dynamics (used by
// the closed-form cross-checks; the curvature here is deterministic).
StationaryEstimate simulate_stationary_mean(const MeanEstProblem& problem,
                                            const coeffs::CoeffSeq& beta,
                                            const analysis::ProblemParams& params,
                                            std::size_t T, std::size_t trials);

enum class SweepAxis { dimension, eigen_decay, learning_rate };
SweepAxis axis_from_string(std::string_view name);

struct SweepBase {
  std::size_t d = 128;
  double alpha = 1.0;  // eigenvalues lambda_k = k^{-alpha}
  double eta = 0.02;
  double rho = 0.5;
  double G = 1.0;
  double sigma_sgd = 0.0;
  double nu = 0.0;  // 0 -> eta * smallest lambda_min over the grid
  std::size_t trials = 8;
  std::size_t t_cap = 200000;
  double t_mult = 20.0;  // T = min(t_cap, t_mult / (eta * mu))
  std::uint64_t seed = 0;
};

struct SweepPoint {
  double axis_value = 0.0;
  double x_sgd = 0.0;   // abscissa used for the Noisy-SGD fit
  double x_ftrl = 0.0;  // abscissa used for the Noisy-FTRL fit (d_eff based)
  double d_eff = 0.0;
  std::string algorithm;
  double estimate = 0.0;
  double stderr_boot = 0.0;
  double theory = 0.0;
  bool diverged = false;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::map<std::string, SlopeFit> fits;         // empirical, per algorithm
  std::map<std::string, SlopeFit> theory_fits;  // upper-bound line, same x
  double nu = 0.0;                              // the fixed nu actually used
};

// Runs simulate_stationary for Noisy-SGD and nu-Noisy-FTRL across the grid
// and fits slopes in log-log coordinates. Abscissas: dimension axis fits
// Noisy-SGD against d and Noisy-FTRL against d_eff; eigen_decay fits both
// against d_eff; learning_rate fits both against eta. Diverged points are
// excluded from fits and reported.
SweepResult sweep(SweepAxis axis, std::span<const double> grid,
                  const SweepBase& base);

struct LtiCheck {
  double empirical = 0.0;
  double analytic = 0.0;
  double mc_stderr = 0.0;
};

// Scalar recursion delta_{t+1} = (1-a) delta_t + a*sigma*u_t against the
// stationary-variance integral a^2 sigma^2/(2pi) int dw/|1-a-e^{iw}|^2
// = a sigma^2/(2-a).
LtiCheck lti_variance_check(double a, double sigma, std::size_t T,
                            std::size_t trials);

// Worker-pool width: min(hardware, CORRNOISE_THREADS when set, jobs).
std::size_t worker_count(std::size_t jobs);

}  // namespace corrnoise::simlab
