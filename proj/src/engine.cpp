#include "corrnoise/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "corrnoise/kernels.hpp"
#include "corrnoise/rng.hpp"
#include "corrnoise/toeplitz.hpp"

namespace corrnoise::engine {

std::vector<double> clip(std::span<const double> g, double G) {
  if (!(G > 0.0)) throw std::invalid_argument("clip: G must be positive");
  std::vector<double> out(g.begin(), g.end());
  const double n2 = kernels::ops().nrm2sq(out.data(), out.size());
  if (n2 > G * G) {
    const double scale = G / std::sqrt(n2);
    for (double& v : out) v *= scale;
  }
  return out;
}

double noise_multiplier(const coeffs::CoeffSeq& beta, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("noise_multiplier: rho > 0");
  if (std::isinf(rho)) return 0.0;
  return toeplitz::sensitivity_T(beta) / std::sqrt(2.0 * rho);
}

namespace {

double eps_objective(double rho, double delta, double alpha) {
  return rho * alpha + std::log(1.0 / (alpha * delta)) / (alpha - 1.0) +
         std::log(1.0 - 1.0 / alpha);
}

}  // namespace

double zcdp_to_eps(double rho, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("zcdp_to_eps: delta must be in (0, 1)");
  }
  if (!(rho >= 0.0)) throw std::invalid_argument("zcdp_to_eps: rho >= 0");
  auto f = [&](double log_alpha) {
    return eps_objective(rho, delta, 1.0 + std::exp(log_alpha));
  };
  // Coarse scan to bracket the minimum, then golden-section refinement.
  const double lo = 1e-6, hi = 40.0;
  const int scan = 256;
  double best_x = lo, best_v = f(lo);
  for (int i = 1; i <= scan; ++i) {
    const double x = lo + (hi - lo) * i / scan;
    const double v = f(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  const double step = (hi - lo) / scan;
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 200 && (b - a) > 1e-12; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return std::max(0.0, std::min(std::min(fc, fd), best_v));
}

IterateLog run(GradOracle& oracle, const RunConfig& cfg, const Metric& metric,
               const NoiseProvider& provider, const NoiseTap& tap) {
  if (cfg.T == 0 || cfg.d == 0) {
    throw std::invalid_argument("run: T and d must be positive");
  }
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("run: eta must be > 0");

  const double sigma_dp =
      cfg.sigma_dp ? *cfg.sigma_dp : noise_multiplier(cfg.beta, cfg.rho);
  const double noise_scale = sigma_dp * cfg.G;

  // Default provider: raw counter-RNG draws through the streaming Toeplitz
  // operator, pre-scaled so the emitted values are the injected noise.
  std::optional<toeplitz::NoiseStream> stream;
  std::vector<double> raw(cfg.d);
  NoiseProvider noise = provider;
  if (!noise) {
    stream.emplace(cfg.beta, cfg.d, cfg.T, cfg.noise_window);
    noise = [&](std::size_t t, std::span<double> out) {
      if (noise_scale == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
      }
      for (std::size_t i = 0; i < cfg.d; ++i) {
        raw[i] = noise_scale * rng::gaussian(cfg.seed, rng::kDpNoise, t,
                                             static_cast<std::uint32_t>(i));
      }
      stream->step(raw, out);
    };
  }

  const std::size_t dense_tail =
      cfg.dense_tail == 0 ? cfg.T / 4 : std::min(cfg.dense_tail, cfg.T);
  const std::size_t dense_from = cfg.T - dense_tail;

  IterateLog log;
  log.sigma_dp = sigma_dp;
  log.is_private = cfg.clip_enabled;

  std::vector<double> theta(cfg.d, 0.0);
  std::vector<double> g(cfg.d);
  std::vector<double> w(cfg.d);
  const auto& ops = kernels::ops();

  for (std::size_t t = 0; t < cfg.T; ++t) {
    oracle.grad(theta, t, g);
    if (cfg.clip_enabled) {
      const double n2 = ops.nrm2sq(g.data(), g.size());
      if (n2 > cfg.G * cfg.G) {
        const double scale = cfg.G / std::sqrt(n2);
        for (double& v : g) v *= scale;
      }
    }
    noise(t, w);
    if (tap) tap(t, w);
    ops.axpy(g.data(), 1.0, w.data(), cfg.d);          // g += w
    ops.axpy(theta.data(), -cfg.eta, g.data(), cfg.d); // theta -= eta*g

    bool finite = true;
    for (const double v : theta) {
      if (!std::isfinite(v)) {
        finite = false;
        break;
      }
    }
    if (!finite) throw divergence_error(t);

    const bool log_now =
        (t % cfg.log_stride == 0) || (t + 1 >= dense_from) || (t + 1 == cfg.T);
    if (metric && log_now) {
      log.steps.push_back(t);
      log.metric.push_back(metric(theta));
    }
    if (cfg.snapshot_iterates && (t % cfg.log_stride == 0 || t + 1 == cfg.T)) {
      log.snapshot_steps.push_back(t);
      log.snapshots.push_back(theta);
    }
  }
  log.final_theta = std::move(theta);
  return log;
}

}  // namespace corrnoise::engine
