#include "corrnoise/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "corrnoise/toeplitz.hpp"

namespace corrnoise::analysis {
namespace {

constexpr double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();

void check_linreg_params(const Spectrum& spectrum, const ProblemParams& p) {
  if (!(p.eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(p.eta * p.R_sq < 1.0)) {
    throw std::invalid_argument("requires eta * R_sq < 1");
  }
  if (!(p.eta * spectrum.lmax() < 1.0)) {
    throw std::invalid_argument("requires eta * lambda_max < 1");
  }
  if (!(p.rho > 0.0)) throw std::invalid_argument("rho must be positive");
}

double h_weighted_integral(const spectral::Fn& bmagsq,
                           const Spectrum& spectrum, double eta,
                           const spectral::QuadratureSpec& quad) {
  auto integrand = [&](double w) {
    return bmagsq(w) * spectral::h_omega(spectrum.view(), eta, w);
  };
  return spectral::integrate(integrand, quad);
}

}  // namespace

Spectrum::Spectrum(std::vector<double> vals) : eigenvalues(std::move(vals)) {
  if (eigenvalues.empty()) {
    throw std::invalid_argument("Spectrum: at least one eigenvalue");
  }
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
    if (!(eigenvalues[j] > 0.0)) {
      throw std::invalid_argument("Spectrum: eigenvalues must be positive");
    }
    if (j > 0 && eigenvalues[j] > eigenvalues[j - 1] + 1e-15) {
      throw std::invalid_argument("Spectrum: eigenvalues must be descending");
    }
  }
}

Spectrum Spectrum::constant(std::size_t d, double value) {
  return Spectrum(std::vector<double>(d, value));
}

Spectrum Spectrum::power_decay(double a, std::size_t d) {
  std::vector<double> v(d);
  for (std::size_t k = 0; k < d; ++k) {
    v[k] = std::pow(static_cast<double>(k + 1), -a);
  }
  return Spectrum(std::move(v));
}

double Spectrum::trace() const {
  double s = 0.0;
  for (const double l : eigenvalues) s += l;
  return s;
}

ProblemParams ProblemParams::standard(const Spectrum& spectrum, double eta,
                                      double rho, double clip_G,
                                      double sigma_sgd) {
  ProblemParams p;
  p.eta = eta;
  p.rho = rho;
  p.clip_G = clip_G;
  p.sigma_sgd = sigma_sgd;
  p.R_sq = 3.0 * spectrum.trace();
  p.C_kurt = 3.0;
  return p;
}

double effective_dim(const Spectrum& spectrum) {
  return spectrum.trace() / spectrum.lmax();
}

double mean_finf(const spectral::Fn& bmagsq, const ProblemParams& params,
                 const spectral::QuadratureSpec& quad) {
  if (!(params.eta > 0.0 && params.eta <= 1.0)) {
    throw std::invalid_argument("mean_finf: eta must be in (0, 1]");
  }
  const double gamma = toeplitz::sensitivity_inf(bmagsq, quad);
  if (std::isinf(gamma)) return kInf;
  const double g2 = gamma * gamma;
  const double dp_scale = params.clip_G * params.clip_G / (2.0 * params.rho);
  const double s2 = params.sigma_sgd * params.sigma_sgd;
  auto integrand = [&](double w) {
    return (bmagsq(w) * dp_scale * g2 + s2) /
           spectral::one_pole_magnitude_sq(params.eta, w);
  };
  return params.eta * params.eta / (2.0 * kPi) *
         spectral::integrate(integrand, quad);
}

double mean_optimal_profile(double eta, double omega) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("mean_optimal_profile: eta in [0, 1]");
  }
  return std::sqrt(spectral::one_pole_magnitude_sq(eta, omega));
}

double quadform_Tj(const coeffs::CoeffSeq& beta, double eta_lambda) {
  if (!(eta_lambda > 0.0 && eta_lambda < 1.0)) {
    throw std::invalid_argument("quadform_Tj: requires 0 < eta*lambda < 1");
  }
  const double c = 1.0 - eta_lambda;
  // S = sum_t beta_t (beta_t + 2 p_t), p_t = c (p_{t-1} + beta_{t-1}).
  double p = 0.0;
  double prev = 0.0;
  double s = 0.0;
  for (std::size_t t = 0; t < beta.size(); ++t) {
    if (t > 0) p = c * (p + prev);
    const double bt = beta[t];
    s += bt * (bt + 2.0 * p);
    prev = bt;
  }
  return s;
}

double quadform_T(const coeffs::CoeffSeq& beta, const Spectrum& spectrum,
                  double eta) {
  if (!(eta * spectrum.lmax() < 1.0)) {
    throw std::invalid_argument("quadform_T: requires eta * lambda_max < 1");
  }
  double s = 0.0;
  for (const double l : spectrum.eigenvalues) s += quadform_Tj(beta, eta * l);
  return s;
}

double linreg_finf_upper(const coeffs::CoeffSeq& beta,
                         const Spectrum& spectrum, const ProblemParams& params,
                         BoundForm form, const spectral::QuadratureSpec& quad) {
  check_linreg_params(spectrum, params);
  auto bmagsq = [&](double w) { return toeplitz::dtft_magnitude_sq(beta, w); };
  if (form == BoundForm::frequency) {
    return linreg_finf_upper(spectral::Fn(bmagsq), spectrum, params, quad);
  }
  const double gamma = toeplitz::sensitivity_inf(bmagsq, quad);
  if (std::isinf(gamma)) return kInf;
  const double contraction =
      1.0 / ((1.0 - std::sqrt(params.eta * params.R_sq)) *
             (1.0 - std::sqrt(params.eta * params.R_sq)));
  const double sgd_term = (1.0 + contraction) * params.eta * params.R_sq *
                          params.sigma_sgd * params.sigma_sgd;
  const double dp_term = (1.0 + params.C_kurt * contraction) * params.eta *
                         params.clip_G * params.clip_G * gamma * gamma /
                         (2.0 * params.rho) *
                         quadform_T(beta, spectrum, params.eta);
  return sgd_term + dp_term;
}

double linreg_finf_upper(const spectral::Fn& bmagsq, const Spectrum& spectrum,
                         const ProblemParams& params,
                         const spectral::QuadratureSpec& quad) {
  check_linreg_params(spectrum, params);
  const double gamma = toeplitz::sensitivity_inf(bmagsq, quad);
  if (std::isinf(gamma)) return kInf;
  const double contraction =
      1.0 / ((1.0 - std::sqrt(params.eta * params.R_sq)) *
             (1.0 - std::sqrt(params.eta * params.R_sq)));
  const double sgd_term = (1.0 + contraction) * params.eta * params.R_sq *
                          params.sigma_sgd * params.sigma_sgd;
  const double integral = h_weighted_integral(bmagsq, spectrum, params.eta, quad);
  const double dp_term = (1.0 + params.C_kurt * contraction) * params.eta *
                         params.eta * params.clip_G * params.clip_G * gamma *
                         gamma / (2.0 * kPi * params.rho) * integral;
  return sgd_term + dp_term;
}

double linreg_finf_lower(const spectral::Fn& bmagsq, const Spectrum& spectrum,
                         const ProblemParams& params,
                         const spectral::QuadratureSpec& quad) {
  check_linreg_params(spectrum, params);
  const double gamma = toeplitz::sensitivity_inf(bmagsq, quad);
  const double sgd_term = 0.5 * params.eta * params.sigma_sgd *
                          params.sigma_sgd * spectrum.trace();
  if (std::isinf(gamma)) return kInf;
  const double integral = h_weighted_integral(bmagsq, spectrum, params.eta, quad);
  return sgd_term + params.eta * params.eta * params.clip_G * params.clip_G *
                        gamma * gamma / (4.0 * kPi * params.rho) * integral;
}

double universal_floor(const Spectrum& spectrum, const ProblemParams& params) {
  return 0.25 *
         (2.0 * params.eta * params.sigma_sgd * params.sigma_sgd +
          params.eta * params.eta * params.clip_G * params.clip_G /
              (2.0 * params.rho)) *
         spectrum.trace();
}

double antipgd_h_integral(double nu, const Spectrum& spectrum, double eta) {
  // int |1-nu-e^{iw}|^2 / |1-eta*l_j-e^{iw}|^2 dw expanded termwise with the
  // cosine-kernel closed form:
  //   (1/2pi) int ... = [(1+(1-nu)^2) - 2(1-nu)(1-eta*l_j)] / (eta*l_j(2-eta*l_j)).
  double s = 0.0;
  const double r = 1.0 - nu;
  for (const double l : spectrum.eigenvalues) {
    const double el = eta * l;
    const double c = 1.0 - el;
    s += l * 2.0 * kPi * ((1.0 + r * r) - 2.0 * r * c) / (el * (2.0 - el));
  }
  return s;
}

Envelope antipgd_finf(double nu, const Spectrum& spectrum,
                      const ProblemParams& params) {
  if (!(nu > 0.0 && nu < 1.0)) {
    throw std::invalid_argument("antipgd_finf: requires nu in (0, 1)");
  }
  check_linreg_params(spectrum, params);
  const double g2 = 1.0 / (nu * (2.0 - nu));
  const double integral = antipgd_h_integral(nu, spectrum, params.eta);
  const double G2 = params.clip_G * params.clip_G;
  const double s2 = params.sigma_sgd * params.sigma_sgd;
  const double contraction =
      1.0 / ((1.0 - std::sqrt(params.eta * params.R_sq)) *
             (1.0 - std::sqrt(params.eta * params.R_sq)));
  Envelope env;
  env.lower = 0.5 * params.eta * s2 * spectrum.trace() +
              params.eta * params.eta * G2 * g2 / (4.0 * kPi * params.rho) *
                  integral;
  env.upper = (1.0 + contraction) * params.eta * params.R_sq * s2 +
              (1.0 + params.C_kurt * contraction) * params.eta * params.eta *
                  G2 * g2 / (2.0 * kPi * params.rho) * integral;
  return env;
}

std::vector<RateRow> rate_table(const DecaySpec& decay,
                                std::span<const std::size_t> dims,
                                const ProblemParams& params,
                                const spectral::QuadratureSpec& quad) {
  std::vector<RateRow> rows;
  rows.reserve(dims.size());
  for (const std::size_t d : dims) {
    const Spectrum spectrum = decay.constant
                                  ? Spectrum::constant(d)
                                  : Spectrum::power_decay(decay.a, d);
    ProblemParams p = params;
    p.R_sq = 3.0 * spectrum.trace();
    if (!(p.eta * p.R_sq < 1.0)) {
      throw std::invalid_argument(
          "rate_table: eta too large for this dimension (eta * 3 tr(H) >= 1)");
    }
    RateRow row;
    row.d = d;
    row.d_eff = effective_dim(spectrum);
    row.noisy_sgd = linreg_finf_upper([](double) { return 1.0; }, spectrum, p,
                                      quad);
    const double nu = p.eta * spectrum.lmin();
    auto profile = [nu](double w) {
      return std::sqrt(spectral::one_pole_magnitude_sq(nu, w));
    };
    row.noisy_ftrl = linreg_finf_upper(spectral::Fn(profile), spectrum, p, quad);
    row.ratio = row.noisy_ftrl / row.noisy_sgd;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace corrnoise::analysis
