#include "corrnoise/engine.hpp"

#include <cmath>
#include <vector>

#include "corrnoise/rng.hpp"
#include "corrnoise/simlab.hpp"
#include "corrnoise/toeplitz.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace corrnoise;
using coeffs::Family;
using coeffs::make_coeffs;

namespace {

struct ZeroOracle final : engine::GradOracle {
  void grad(std::span<const double>, std::uint64_t,
            std::span<double> out) override {
    std::fill(out.begin(), out.end(), 0.0);
  }
};

struct ExplodingOracle final : engine::GradOracle {
  void grad(std::span<const double> theta, std::uint64_t,
            std::span<double> out) override {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = -1e155 * (theta[i] + 1.0);
    }
  }
};

}  // namespace

TEST_CASE("clip projects onto the l2 ball") {
  const std::vector<double> small{0.3, -0.4};
  const auto kept = engine::clip(small, 1.0);
  CHECK(kept == small);  // returned untouched, no scaling applied

  const auto scaled = engine::clip(std::vector<double>{3.0, 4.0}, 1.0);
  CHECK(scaled[0] == doctest::Approx(0.6));
  CHECK(scaled[1] == doctest::Approx(0.8));

  for (int i = 0; i < 1000; ++i) {
    std::vector<double> g(5);
    for (std::size_t j = 0; j < g.size(); ++j) {
      g[j] = testutil::uniform_in(40, i, -3.0, 3.0,
                                  static_cast<std::uint32_t>(j));
    }
    const auto c = engine::clip(g, 1.0);
    double n2 = 0.0;
    for (const double v : c) n2 += v * v;
    CHECK(n2 <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(engine::clip(small, 0.0), std::invalid_argument);
}

TEST_CASE("noise multiplier") {
  CHECK(engine::noise_multiplier(make_coeffs(Family::dpsgd, 0, 8), 0.5) ==
        doctest::Approx(1.0));
  CHECK(engine::noise_multiplier(make_coeffs(Family::anti_pgd, 0, 4), 0.5) ==
        doctest::Approx(2.0));
  const auto beta = make_coeffs(Family::nu, 0.1, 64);
  const double s1 = engine::noise_multiplier(beta, 1.0);
  const double s2 = engine::noise_multiplier(beta, 2.0);
  CHECK(s1 / s2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  // Round trip: sigma^2 * 2 rho = gamma_T^2.
  const double g = toeplitz::sensitivity_T(beta);
  CHECK(s1 * s1 * 2.0 == doctest::Approx(g * g).epsilon(1e-12));
  CHECK_THROWS_AS(engine::noise_multiplier(beta, 0.0), std::invalid_argument);
}

TEST_CASE("zCDP to (eps, delta) conversion") {
  CHECK(engine::zcdp_to_eps(0.0, 1e-6) == doctest::Approx(0.0).epsilon(1e-9));

  // Brute-force grid oracle over log(alpha).
  auto oracle = [](double rho, double delta) {
    double best = 1e300;
    for (int i = 0; i <= 1000000; ++i) {
      const double la = 1e-6 + (40.0 - 1e-6) * i / 1000000.0;
      const double alpha = 1.0 + std::exp(la);
      const double v = rho * alpha +
                       std::log(1.0 / (alpha * delta)) / (alpha - 1.0) +
                       std::log(1.0 - 1.0 / alpha);
      best = std::min(best, v);
    }
    return std::max(0.0, best);
  };
  for (const double rho : {0.1, 1.0, 8.0}) {
    for (const double delta : {1e-5, 1e-6}) {
      CHECK(std::abs(engine::zcdp_to_eps(rho, delta) - oracle(rho, delta)) <=
            1e-4);
    }
  }

  // Monotone in rho, anti-monotone in delta.
  double prev = 0.0;
  for (const double rho : {0.01, 0.1, 0.5, 1.0, 4.0}) {
    const double e = engine::zcdp_to_eps(rho, 1e-6);
    CHECK(e >= prev);
    prev = e;
  }
  CHECK(engine::zcdp_to_eps(1.0, 1e-5) <= engine::zcdp_to_eps(1.0, 1e-6));
  CHECK_THROWS_AS(engine::zcdp_to_eps(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("zero oracle and disabled noise keep the iterate fixed") {
  ZeroOracle oracle;
  engine::RunConfig cfg;
  cfg.T = 64;
  cfg.eta = 0.3;
  cfg.d = 3;
  cfg.beta = make_coeffs(Family::dpsgd, 0, 64);
  cfg.rho = std::numeric_limits<double>::infinity();  // no DP noise
  const auto log = engine::run(oracle, cfg);
  for (const double v : log.final_theta) CHECK(v == 0.0);
  CHECK_FALSE(log.sigma_dp > 0.0);
}

TEST_CASE("identity coefficients reduce to the independent-noise loop") {
  // Hand-rolled reference loop drawing the same counter RNG values.
  simlab::MeanEstProblem problem{0.4, 0.0, 99};
  simlab::MeanEstOracle oracle(problem, 99);
  engine::RunConfig cfg;
  cfg.T = 256;
  cfg.eta = 0.25;
  cfg.G = 1.0;
  cfg.clip_enabled = false;
  cfg.rho = 0.5;
  cfg.d = 1;
  cfg.seed = 99;
  cfg.beta = make_coeffs(Family::dpsgd, 0, 256);
  const auto log = engine::run(oracle, cfg);

  const double sigma = engine::noise_multiplier(cfg.beta, cfg.rho) * cfg.G;
  double theta = 0.0;
  for (std::size_t t = 0; t < cfg.T; ++t) {
    const double g = theta - 0.4;
    const double w = sigma * rng::gaussian(99, rng::kDpNoise, t, 0);
    theta -= cfg.eta * (g + w);
  }
  CHECK(log.final_theta[0] == theta);  // draw-for-draw, bit-for-bit
}

TEST_CASE("deterministic contraction to the mean") {
  simlab::MeanEstProblem problem{0.8, 0.0, 7};
  simlab::MeanEstOracle oracle(problem, 7);
  engine::RunConfig cfg;
  cfg.T = 40;
  cfg.eta = 0.5;
  cfg.d = 1;
  cfg.seed = 7;
  cfg.beta = make_coeffs(Family::dpsgd, 0, 40);
  cfg.rho = std::numeric_limits<double>::infinity();
  const auto log = engine::run(oracle, cfg);
  // theta_t - m = (1-eta)^t (theta_0 - m)
  const double expect = 0.8 + std::pow(0.5, 40.0) * (0.0 - 0.8);
  CHECK(log.final_theta[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("runs are bit-reproducible") {
  simlab::LinRegProblem problem{analysis::Spectrum::power_decay(1.0, 6),
                                {}, 0.2, 11};
  engine::RunConfig cfg;
  cfg.T = 200;
  cfg.eta = 0.05;
  cfg.G = 2.0;
  cfg.clip_enabled = true;
  cfg.rho = 1.0;
  cfg.d = 6;
  cfg.seed = 11;
  cfg.beta = make_coeffs(Family::nu, 0.2, 200);

  simlab::LinRegOracle o1(problem, 11), o2(problem, 11);
  const auto a = engine::run(o1, cfg);
  const auto b = engine::run(o2, cfg);
  CHECK(a.final_theta == b.final_theta);
  CHECK(a.metric == b.metric);
}

TEST_CASE("injected noise has the accounted variance and correlation") {
  engine::RunConfig cfg;
  cfg.T = 4096;
  cfg.eta = 0.01;
  cfg.G = 1.5;
  cfg.clip_enabled = false;
  cfg.rho = 0.7;
  cfg.d = 4;
  cfg.seed = 21;
  cfg.beta = make_coeffs(Family::nu, 0.3, 4096);
  ZeroOracle oracle;

  std::vector<std::vector<double>> injected;
  engine::NoiseTap tap = [&](std::size_t, std::span<const double> w) {
    injected.emplace_back(w.begin(), w.end());
  };
  engine::run(oracle, cfg, {}, {}, tap);
  REQUIRE(injected.size() == cfg.T);

  // Reconstruct the raw draws by deconvolving with the inverse column; they
  // must match an independent regeneration from the counter RNG bit-for-bit
  // up to the deconvolution roundoff.
  const double scale = engine::noise_multiplier(cfg.beta, cfg.rho) * cfg.G;
  const auto inv = toeplitz::invert_first_column(cfg.beta);
  double mse = 0.0, var = 0.0;
  for (std::size_t t = 0; t < cfg.T; ++t) {
    for (std::size_t i = 0; i < cfg.d; ++i) {
      double raw = 0.0;
      for (std::size_t tau = 0; tau <= t; ++tau) {
        raw += inv.values[tau] * injected[t - tau][i];
      }
      const double expect =
          scale * rng::gaussian(cfg.seed, rng::kDpNoise, t,
                                static_cast<std::uint32_t>(i));
      mse += (raw - expect) * (raw - expect);
      var += raw * raw;
    }
  }
  const double n = static_cast<double>(cfg.T * cfg.d);
  CHECK(mse / n < 1e-16);
  // Per-coordinate raw variance ~ sigma_dp^2 G^2 (within MC error).
  CHECK(var / n == doctest::Approx(scale * scale).epsilon(0.05));
}

TEST_CASE("generous clipping reproduces the unclipped trajectory exactly") {
  simlab::LinRegProblem problem{analysis::Spectrum::power_decay(0.5, 5),
                                {}, 0.1, 31};
  engine::RunConfig clipped;
  clipped.T = 500;
  clipped.eta = 0.05;
  clipped.G = 1e6;  // larger than every observed gradient norm
  clipped.clip_enabled = true;
  clipped.rho = 1e12;  // negligible noise keeps gradients small
  clipped.d = 5;
  clipped.seed = 31;
  clipped.beta = make_coeffs(Family::nu, 0.2, 500);
  auto unclipped = clipped;
  unclipped.clip_enabled = false;

  simlab::LinRegOracle o1(problem, 31), o2(problem, 31);
  const auto a = engine::run(o1, clipped);
  const auto b = engine::run(o2, unclipped);
  CHECK(a.final_theta == b.final_theta);
  CHECK(a.is_private);
  CHECK_FALSE(b.is_private);
}

TEST_CASE("divergence aborts with the offending step") {
  ExplodingOracle oracle;
  engine::RunConfig cfg;
  cfg.T = 64;
  cfg.eta = 1.0;
  cfg.d = 2;
  cfg.clip_enabled = false;
  cfg.rho = std::numeric_limits<double>::infinity();
  cfg.beta = make_coeffs(Family::dpsgd, 0, 64);
  try {
    engine::run(oracle, cfg);
    FAIL("expected divergence");
  } catch (const engine::divergence_error& e) {
    CHECK(e.step < 8);  // blows past the float range within a few steps
  }
}
