#include "corrnoise/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "corrnoise/fft_conv.hpp"
#include "corrnoise/kernels.hpp"
#include "corrnoise/rng.hpp"
#include "corrnoise/spectral.hpp"
#include "corrnoise/toeplitz.hpp"

namespace corrnoise::simlab {
namespace {

double tail_mean(const engine::IterateLog& log, std::size_t T) {
  const std::size_t from = T - T / 4;
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    if (log.steps[i] + 1 >= from) {
      s += log.metric[i];
      ++n;
    }
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

double bootstrap_stderr(const std::vector<double>& trial_means,
                        std::uint64_t seed) {
  const std::size_t n = trial_means.size();
  if (n < 2) return 0.0;
  const int B = 500;
  double m1 = 0.0, m2 = 0.0;
  for (int b = 0; b < B; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng::uniform(seed, rng::kTest,
                                    static_cast<std::uint64_t>(b) * 1000 + i,
                                    7);
      s += trial_means[static_cast<std::size_t>(u * n) % n];
    }
    s /= static_cast<double>(n);
    m1 += s;
    m2 += s * s;
  }
  m1 /= B;
  m2 /= B;
  return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

}  // namespace

std::size_t worker_count(std::size_t jobs) {
  std::size_t hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("CORRNOISE_THREADS")) {
    const long cap = std::atol(env);
    if (cap > 0) hw = std::min<std::size_t>(hw, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, std::min(hw, jobs));
}

namespace {

// Runs fn(job) for job = 0..jobs-1 on the worker pool; rethrows the first
// exception.
void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) fn(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t j = next.fetch_add(1);
        if (j >= jobs) return;
        try {
          fn(j);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

LinRegOracle::LinRegOracle(const LinRegProblem& problem, std::uint64_t seed)
    : sigma_sgd_(problem.sigma_sgd), seed_(seed) {
  const std::size_t d = problem.spectrum.dim();
  sqrt_lambda_.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    sqrt_lambda_[j] = std::sqrt(problem.spectrum.eigenvalues[j]);
  }
  theta_star_ = problem.theta_star;
  if (theta_star_.empty()) theta_star_.assign(d, 0.0);
  x_.resize(d);
}

void LinRegOracle::grad(std::span<const double> theta, std::uint64_t t,
                        std::span<double> out) {
  const std::size_t d = x_.size();
  for (std::size_t i = 0; i < d; ++i) {
    x_[i] = sqrt_lambda_[i] *
            rng::gaussian(seed_, rng::kCovariate, t, static_cast<std::uint32_t>(i));
  }
  // g = x (<x, theta - theta*> - xi)
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += x_[i] * (theta[i] - theta_star_[i]);
  if (sigma_sgd_ > 0.0) {
    s -= sigma_sgd_ * rng::gaussian(seed_, rng::kResidual, t, 0);
  }
  for (std::size_t i = 0; i < d; ++i) out[i] = s * x_[i];
}

MeanEstOracle::MeanEstOracle(const MeanEstProblem& problem, std::uint64_t seed)
    : mean_(problem.mean), sigma_sgd_(problem.sigma_sgd), seed_(seed) {}

void MeanEstOracle::grad(std::span<const double> theta, std::uint64_t t,
                         std::span<double> out) {
  // f(theta; z) = z^2/2 - z*theta with r(theta) = theta^2/2: the total
  // gradient is theta - z for z = mean + sigma*u.
  double z = mean_;
  if (sigma_sgd_ > 0.0) {
    z += sigma_sgd_ * rng::gaussian(seed_, rng::kResidual, t, 0);
  }
  out[0] = theta[0] - z;
}

SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& xy) {
  SlopeFit fit;
  for (const auto& [x, y] : xy) {
    if (x > 0.0 && y > 0.0) fit.points.emplace_back(std::log(x), std::log(y));
  }
  const std::size_t n = fit.points.size();
  if (n < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [lx, ly] : fit.points) {
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double den = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / n;
  for (const auto& [lx, ly] : fit.points) {
    const double pred = fit.slope * lx + fit.intercept;
    ss_res += (ly - pred) * (ly - pred);
    ss_tot += (ly - mean_y) * (ly - mean_y);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

// Per-trial run through the engine with the FFT-precomputed noise matrix.
// The raw draws are identical to the streaming provider's: only the
// summation order differs.
double linreg_trial(const LinRegProblem& problem, const coeffs::CoeffSeq& beta,
                    const analysis::ProblemParams& params, std::size_t T,
                    std::uint64_t trial_seed, double sigma_dp) {
  const std::size_t d = problem.spectrum.dim();
  const double scale = sigma_dp * params.clip_G;

  std::vector<double> noise;  // step-major [T x d]
  if (scale > 0.0) {
    noise.assign(T * d, 0.0);
    fft_conv::Convolver conv(beta.values, T);
    std::vector<double> col(T), out(T);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t t = 0; t < T; ++t) {
        col[t] = scale * rng::gaussian(trial_seed, rng::kDpNoise, t,
                                       static_cast<std::uint32_t>(i));
      }
      conv.apply(col, out);
      for (std::size_t t = 0; t < T; ++t) noise[t * d + i] = out[t];
    }
  }

  LinRegOracle oracle(problem, trial_seed);
  engine::RunConfig cfg;
  cfg.T = T;
  cfg.eta = params.eta;
  cfg.G = params.clip_G;
  cfg.clip_enabled = false;  // Noisy-FTRL
  cfg.rho = params.rho;
  cfg.beta = beta;
  cfg.d = d;
  cfg.seed = trial_seed;
  cfg.sigma_dp = sigma_dp;
  cfg.log_stride = std::max<std::size_t>(1, T / 64);

  std::vector<double> theta_star = problem.theta_star;
  if (theta_star.empty()) theta_star.assign(d, 0.0);
  const auto* lambda = problem.spectrum.eigenvalues.data();
  engine::Metric metric = [&](std::span<const double> theta) {
    return 0.5 * kernels::ops().weighted_sqdist(lambda, theta.data(),
                                                theta_star.data(), d);
  };
  engine::NoiseProvider provider;
  if (scale > 0.0) {
    provider = [&noise, d](std::size_t t, std::span<double> out) {
      const double* row = noise.data() + t * d;
      std::copy(row, row + d, out.begin());
    };
  } else {
    provider = [](std::size_t, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
    };
  }
  const engine::IterateLog log = engine::run(oracle, cfg, metric, provider);
  return tail_mean(log, T);
}

}  // namespace

StationaryEstimate simulate_stationary(const LinRegProblem& problem,
                                       const coeffs::CoeffSeq& beta,
                                       const analysis::ProblemParams& params,
                                       std::size_t T, std::size_t trials) {
  if (params.eta * params.R_sq >= 1.0) {
    std::fprintf(stderr,
                 "simulate_stationary: warning: eta*R_sq = %.3g >= 1 "
                 "(outside the stationary theory's range)\n",
                 params.eta * params.R_sq);
  }
  const double sigma_dp =
      std::isinf(params.rho)
          ? 0.0
          : toeplitz::sensitivity_T_fast(beta) / std::sqrt(2.0 * params.rho);

  std::vector<double> per_trial(trials, 0.0);
  parallel_for(trials, [&](std::size_t trial) {
    const std::uint64_t trial_seed = rng::mix(problem.seed, trial);
    per_trial[trial] =
        linreg_trial(problem, beta, params, T, trial_seed, sigma_dp);
  });

  StationaryEstimate est;
  est.per_trial = per_trial;
  double s = 0.0;
  for (const double v : per_trial) s += v;
  est.value = s / static_cast<double>(trials);
  est.stderr_boot = bootstrap_stderr(per_trial, rng::mix(problem.seed, 0xB007));
  return est;
}

StationaryEstimate simulate_stationary_mean(const MeanEstProblem& problem,
                                            const coeffs::CoeffSeq& beta,
                                            const analysis::ProblemParams& params,
                                            std::size_t T,
                                            std::size_t trials) {
  const double sigma_dp =
      std::isinf(params.rho)
          ? 0.0
          : toeplitz::sensitivity_T_fast(beta) / std::sqrt(2.0 * params.rho);
  std::vector<double> per_trial(trials, 0.0);
  parallel_for(trials, [&](std::size_t trial) {
    const std::uint64_t trial_seed = rng::mix(problem.seed, trial);
    MeanEstOracle oracle(problem, trial_seed);
    engine::RunConfig cfg;
    cfg.T = T;
    cfg.eta = params.eta;
    cfg.G = params.clip_G;
    cfg.clip_enabled = false;
    cfg.rho = params.rho;
    cfg.beta = beta;
    cfg.d = 1;
    cfg.seed = trial_seed;
    cfg.sigma_dp = sigma_dp;
    cfg.log_stride = std::max<std::size_t>(1, T / 64);
    const double m = problem.mean;
    engine::Metric metric = [m](std::span<const double> theta) {
      // Mean-estimation suboptimality is the stationary variance (theta - m)^2.
      return (theta[0] - m) * (theta[0] - m);
    };
    const engine::IterateLog log = engine::run(oracle, cfg, metric);
    per_trial[trial] = tail_mean(log, T);
  });
  StationaryEstimate est;
  est.per_trial = per_trial;
  double s = 0.0;
  for (const double v : per_trial) s += v;
  est.value = s / static_cast<double>(trials);
  est.stderr_boot = bootstrap_stderr(per_trial, rng::mix(problem.seed, 0xB007));
  return est;
}

SweepAxis axis_from_string(std::string_view name) {
  if (name == "dimension") return SweepAxis::dimension;
  if (name == "eigen_decay") return SweepAxis::eigen_decay;
  if (name == "learning_rate") return SweepAxis::learning_rate;
  throw std::invalid_argument("unknown sweep axis: " + std::string(name));
}

SweepResult sweep(SweepAxis axis, std::span<const double> grid,
                  const SweepBase& base) {
  if (grid.size() < 4) {
    throw std::invalid_argument("sweep: grid needs >= 4 points");
  }
  SweepResult result;

  struct PointConfig {
    double axis_value;
    analysis::Spectrum spectrum;
    double eta;
    std::size_t T;
  };
  std::vector<PointConfig> configs;
  double min_lmin = 1.0;
  for (const double v : grid) {
    std::size_t d = base.d;
    double alpha = base.alpha;
    double eta = base.eta;
    switch (axis) {
      case SweepAxis::dimension: d = static_cast<std::size_t>(v); break;
      case SweepAxis::eigen_decay: alpha = v; break;
      case SweepAxis::learning_rate: eta = v; break;
    }
    analysis::Spectrum spectrum = analysis::Spectrum::power_decay(alpha, d);
    const double mu = spectrum.lmin();
    min_lmin = std::min(min_lmin, mu);
    const double t_exact = base.t_mult / (eta * mu);
    const std::size_t T = static_cast<std::size_t>(std::min(
        static_cast<double>(base.t_cap), std::max(1024.0, t_exact)));
    configs.push_back({v, std::move(spectrum), eta, T});
  }
  const double nu = base.nu > 0.0 ? base.nu : base.eta * min_lmin;
  result.nu = nu;

  std::vector<std::pair<double, double>> sgd_pts, ftrl_pts, sgd_th, ftrl_th;
  spectral::QuadratureSpec quad;
  for (const auto& cfgpt : configs) {
    const double d_eff = analysis::effective_dim(cfgpt.spectrum);
    analysis::ProblemParams params = analysis::ProblemParams::standard(
        cfgpt.spectrum, cfgpt.eta, base.rho, base.G, base.sigma_sgd);
    const double x_sgd = axis == SweepAxis::dimension
                             ? static_cast<double>(cfgpt.spectrum.dim())
                             : (axis == SweepAxis::learning_rate ? cfgpt.eta
                                                                 : d_eff);
    const double x_ftrl =
        axis == SweepAxis::learning_rate ? cfgpt.eta : d_eff;

    for (const bool ftrl : {false, true}) {
      LinRegProblem problem{cfgpt.spectrum, {}, base.sigma_sgd,
                            rng::mix(base.seed, static_cast<std::uint64_t>(
                                                    cfgpt.axis_value * 1e6) +
                                                    (ftrl ? 1 : 0))};
      const coeffs::CoeffSeq beta =
          ftrl ? coeffs::make_coeffs(coeffs::Family::nu, nu, cfgpt.T)
               : coeffs::make_coeffs(coeffs::Family::dpsgd, 1.0, cfgpt.T);
      SweepPoint point;
      point.axis_value = cfgpt.axis_value;
      point.x_sgd = x_sgd;
      point.x_ftrl = x_ftrl;
      point.d_eff = d_eff;
      point.algorithm = ftrl ? "noisy_ftrl" : "noisy_sgd";
      try {
        const StationaryEstimate est =
            simulate_stationary(problem, beta, params, cfgpt.T, base.trials);
        point.estimate = est.value;
        point.stderr_boot = est.stderr_boot;
      } catch (const engine::divergence_error&) {
        point.diverged = true;
      }
      // Theory line: upper bound with the family's limiting profile. Grid
      // points outside the bound's eta*R_sq < 1 range carry no theory value.
      spectral::Fn profile =
          ftrl ? spectral::Fn([nu](double w) {
              return std::sqrt(spectral::one_pole_magnitude_sq(nu, w));
            })
               : spectral::Fn([](double) { return 1.0; });
      if (params.eta * params.R_sq < 1.0) {
        point.theory =
            analysis::linreg_finf_upper(profile, cfgpt.spectrum, params, quad);
      } else {
        point.theory = std::numeric_limits<double>::quiet_NaN();
      }
      result.points.push_back(point);
      if (!point.diverged) {
        auto& pts = ftrl ? ftrl_pts : sgd_pts;
        auto& ths = ftrl ? ftrl_th : sgd_th;
        pts.emplace_back(ftrl ? x_ftrl : x_sgd, point.estimate);
        if (std::isfinite(point.theory)) {
          ths.emplace_back(ftrl ? x_ftrl : x_sgd, point.theory);
        }
      }
    }
  }
  result.fits["noisy_sgd"] = fit_loglog(sgd_pts);
  result.fits["noisy_ftrl"] = fit_loglog(ftrl_pts);
  result.theory_fits["noisy_sgd"] = fit_loglog(sgd_th);
  result.theory_fits["noisy_ftrl"] = fit_loglog(ftrl_th);
  return result;
}

LtiCheck lti_variance_check(double a, double sigma, std::size_t T,
                            std::size_t trials) {
  if (!(a > 0.0 && a <= 1.0)) {
    throw std::invalid_argument("lti_variance_check: a in (0, 1]");
  }
  std::vector<double> per_trial(trials, 0.0);
  parallel_for(trials, [&](std::size_t trial) {
    const std::uint64_t seed = rng::mix(0x17171717ull, trial);
    double delta = 0.0;
    double acc = 0.0;
    std::size_t n = 0;
    const std::size_t from = T - T / 4;
    for (std::size_t t = 0; t < T; ++t) {
      const double u = rng::gaussian(seed, rng::kTest, t, 1);
      delta = (1.0 - a) * delta + a * sigma * u;
      if (t + 1 >= from) {
        acc += delta * delta;
        ++n;
      }
    }
    per_trial[trial] = acc / static_cast<double>(n);
  });
  LtiCheck check;
  double s = 0.0;
  for (const double v : per_trial) s += v;
  check.empirical = s / static_cast<double>(trials);
  check.analytic = a * sigma * sigma / (2.0 - a);
  check.mc_stderr = bootstrap_stderr(per_trial, 0xC0FFEE);
  return check;
}

}  // namespace corrnoise::simlab
