#include "corrnoise/coeffs.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"

using namespace corrnoise::coeffs;

TEST_CASE("fractional binomial coefficient") {
  CHECK(frac_binom(0) == 1.0);                        // empty product
  CHECK(frac_binom(1) == doctest::Approx(0.5));
  CHECK(frac_binom(2) == doctest::Approx(-0.125));    // (1/2)(-1/2)/(1*2)
  CHECK(frac_binom(3) == doctest::Approx(0.0625));
  CHECK_THROWS_AS(frac_binom(-1), std::invalid_argument);

  // Product-formula oracle, evaluated directly.
  for (int t = 0; t <= 40; ++t) {
    double prod = 1.0;
    for (int k = 0; k < t; ++k) prod *= (0.5 - k) / (t - k);
    CHECK(frac_binom(t) == doctest::Approx(prod).epsilon(1e-13));
  }
  // No overflow far beyond where factorial forms die (~t = 170).
  CHECK(std::isfinite(frac_binom(5000)));
}

TEST_CASE("make_coeffs families") {
  const auto nu0 = make_coeffs(Family::nu, 0.0, 4);
  CHECK(nu0.values[0] == 1.0);
  CHECK(nu0.values[1] == doctest::Approx(-0.5));
  CHECK(nu0.values[2] == doctest::Approx(-0.125));
  CHECK(nu0.values[3] == doctest::Approx(-0.0625));

  const auto sgd = make_coeffs(Family::dpsgd, 0.0, 3);
  CHECK(sgd.values == std::vector<double>{1.0, 0.0, 0.0});

  const auto damped = make_coeffs(Family::anti_pgd_damped, 0.25, 3);
  CHECK(damped.values[0] == 1.0);
  CHECK(damped.values[1] == doctest::Approx(-0.75));
  CHECK(damped.values[2] == 0.0);

  const auto anti = make_coeffs(Family::anti_pgd, 0.0, 4);
  CHECK(anti.values == std::vector<double>{1.0, -1.0, 0.0, 0.0});

  // fichtenberger is the nu family at nu = 0.
  const auto fich = make_coeffs(Family::fichtenberger, 0.0, 16);
  const auto nu_zero = make_coeffs(Family::nu, 0.0, 16);
  CHECK(fich.values == nu_zero.values);

  // Closed form against the recurrence path.
  const auto nu3 = make_coeffs(Family::nu, 0.3, 24);
  for (std::size_t t = 0; t < nu3.size(); ++t) {
    const double expect = (t % 2 == 0 ? 1.0 : -1.0) *
                          frac_binom(static_cast<int>(t)) *
                          std::pow(0.7, static_cast<double>(t));
    CHECK(nu3.values[t] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("make_coeffs rejects bad arguments") {
  CHECK_THROWS_AS(make_coeffs(Family::nu, -0.1, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_coeffs(Family::nu, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_coeffs(Family::anti_pgd_damped, 0.0, 8),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_coeffs(Family::mean_optimal, 0.0, 8),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_coeffs(Family::mean_optimal, 1.5, 8),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_coeffs(Family::dpsgd, 0.0, 0), std::invalid_argument);
}

TEST_CASE("nu family sign and decay invariants") {
  for (const double nu : {0.0, 0.05, 0.3, 0.7, 0.99}) {
    // Keep (1-nu)^T above the subnormal range so signs stay representable.
    const std::size_t T = nu > 0.9 ? 64 : 512;
    const auto beta = make_coeffs(Family::nu, nu, T);
    CHECK(beta.values[0] == 1.0);
    for (std::size_t t = 1; t < beta.size(); ++t) {
      CHECK(beta.values[t] < 0.0);
      if (t >= 2) CHECK(std::abs(beta.values[t]) < std::abs(beta.values[t - 1]));
    }
    // Upper envelope |beta_t| <= c * t^{-3/2} (1-nu)^t with a fitted c: the
    // normalized sequence must be bounded and flat in the tail.
    double cmax = 0.0;
    for (std::size_t t = 1; t < beta.size(); ++t) {
      const double envelope = std::pow(static_cast<double>(t), -1.5) *
                              std::pow(1.0 - nu, static_cast<double>(t));
      if (envelope == 0.0) break;
      cmax = std::max(cmax, std::abs(beta.values[t]) / envelope);
    }
    CHECK(cmax > 0.0);
    CHECK(cmax <= 0.51);  // |binom(1/2,t)| ~ t^{-3/2} / (2 sqrt(pi)) < 0.51 t^{-3/2}
    // Tail flatness: the ratio settles near 1/(2 sqrt(pi)).
    const std::size_t tt = T / 2;
    const double r1 = std::abs(beta.values[tt]) /
                      (std::pow(static_cast<double>(tt), -1.5) *
                       std::pow(1.0 - nu, static_cast<double>(tt)));
    const double r2 = std::abs(beta.values[T - 1]) /
                      (std::pow(static_cast<double>(T - 1), -1.5) *
                       std::pow(1.0 - nu, static_cast<double>(T - 1)));
    if (r2 > 0.0 && std::isfinite(r2)) {
      CHECK(r1 / r2 == doctest::Approx(1.0).epsilon(0.02));
    }
  }
}

TEST_CASE("nu = 0 partial sums vanish like T^{-1/2}") {
  for (std::size_t T = 16; T <= 4096; T *= 2) {
    const auto beta = make_coeffs(Family::nu, 0.0, T);
    double sum = 0.0;
    for (const double b : beta.values) sum += b;
    CHECK(std::abs(sum) <= 2.0 / std::sqrt(static_cast<double>(T)));
  }
}

TEST_CASE("mean_optimal equals nu elementwise") {
  for (const double eta : {0.05, 0.3, 1.0}) {
    const auto a = make_coeffs(Family::mean_optimal, eta, 64);
    if (eta < 1.0) {
      const auto b = make_coeffs(Family::nu, eta, 64);
      CHECK(a.values == b.values);
    } else {
      CHECK(a.values[0] == 1.0);
      for (std::size_t t = 1; t < a.size(); ++t) CHECK(a.values[t] == 0.0);
    }
  }
}
