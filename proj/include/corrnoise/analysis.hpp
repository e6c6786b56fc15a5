#pragma once

#include <span>
#include <vector>

#include "corrnoise/coeffs.hpp"
#include "corrnoise/spectral.hpp"

// Closed-form and quadrature-based evaluators of the asymptotic
// suboptimality F_inf for mean estimation and linear regression: upper
// bounds, lower bounds, optimal spectral profiles, and rate tables.
namespace corrnoise::analysis {

struct Spectrum {
  std::vector<double> eigenvalues;  // strictly positive, sorted descending

  explicit Spectrum(std::vector<double> vals);
  static Spectrum constant(std::size_t d, double value = 1.0);
  // lambda_k = k^{-a}, k = 1..d (a = 0 reproduces the constant spectrum).
  static Spectrum power_decay(double a, std::size_t d);

  std::size_t dim() const { return eigenvalues.size(); }
  double lmax() const { return eigenvalues.front(); }
  double lmin() const { return eigenvalues.back(); }
  double trace() const;
  std::span<const double> view() const { return eigenvalues; }
};

struct ProblemParams {
  double eta = 0.0;
  double rho = 0.0;
  double clip_G = 1.0;
  double sigma_sgd = 0.0;
  double R_sq = 0.0;    // fourth-moment constant, Gaussian default 3*tr(H)
  double C_kurt = 3.0;  // kurtosis constant, Gaussian default 3

  // Gaussian-input defaults: R_sq = 3 tr(H), C_kurt = 3.
  static ProblemParams standard(const Spectrum& spectrum, double eta,
                                double rho, double clip_G, double sigma_sgd);
};

// d_eff = tr(H) / ||H||_2.
double effective_dim(const Spectrum& spectrum);

// Mean estimation: F_inf(B) =
//   (eta^2/2pi) int (|B(w)|^2 (G^2/2rho) gamma_inf^2(B) + sigma_sgd^2)
//                  / |1 - eta - e^{iw}|^2 dw.
// Returns +infinity when the limiting sensitivity diverges.
double mean_finf(const spectral::Fn& bmagsq, const ProblemParams& params,
                 const spectral::QuadratureSpec& quad);

// |B*(w)|^2 = |1 - eta - e^{iw}| minimizing the mean-estimation product.
double mean_optimal_profile(double eta, double omega);

// <beta, T_j beta> = sum_{t,tau} beta_t beta_tau c^{|t-tau|} for
// c = 1 - eta*lambda_j, via the O(T) geometric-prefix recurrence.
double quadform_Tj(const coeffs::CoeffSeq& beta, double eta_lambda);

// <beta, T beta> = sum_j <beta, T_j beta>; requires eta*lambda_1 < 1.
double quadform_T(const coeffs::CoeffSeq& beta, const Spectrum& spectrum,
                  double eta);

enum class BoundForm { time, frequency };

// Upper bound on F_inf for linear regression. The time form uses
// <beta, T beta>; the frequency form uses the h-weighted integral of
// |B(w)|^2. Requires eta*R_sq < 1; propagates infinite sensitivity.
double linreg_finf_upper(const coeffs::CoeffSeq& beta,
                         const Spectrum& spectrum, const ProblemParams& params,
                         BoundForm form, const spectral::QuadratureSpec& quad);
// Frequency form on a spectral profile |B(w)|^2 given directly.
double linreg_finf_upper(const spectral::Fn& bmagsq, const Spectrum& spectrum,
                         const ProblemParams& params,
                         const spectral::QuadratureSpec& quad);

// Lower bound: (eta sigma_sgd^2 / 2) tr(H)
//              + (eta^2 G^2 gamma_inf^2 / 4 pi rho) int |B|^2 h(w) dw.
double linreg_finf_lower(const spectral::Fn& bmagsq, const Spectrum& spectrum,
                         const ProblemParams& params,
                         const spectral::QuadratureSpec& quad);

// Universal floor over all coefficient choices:
// (1/4) (2 eta sigma_sgd^2 + eta^2 G^2 / (2 rho)) tr(H).
double universal_floor(const Spectrum& spectrum, const ProblemParams& params);

struct Envelope {
  double lower = 0.0;
  double upper = 0.0;
};

// Damped two-step coefficients (1, -(1-nu), 0, ...): exact closed-form
// evaluation of the lower/upper pair (gamma_inf^2 = 1/(nu(2-nu)) and the
// h-integral evaluated term by term).
Envelope antipgd_finf(double nu, const Spectrum& spectrum,
                      const ProblemParams& params);

struct DecaySpec {
  bool constant = false;  // lambda_k = 1
  double a = 1.0;         // else lambda_k = k^{-a}
};

struct RateRow {
  std::size_t d = 0;
  double d_eff = 0.0;
  double noisy_sgd = 0.0;
  double noisy_ftrl = 0.0;
  double ratio = 0.0;
};

// One row per dimension: upper bounds for independent noise (B = 1) and for
// the nu profile with nu = eta*lambda_min, plus their ratio.
std::vector<RateRow> rate_table(const DecaySpec& decay,
                                std::span<const std::size_t> dims,
                                const ProblemParams& params,
                                const spectral::QuadratureSpec& quad);

// Closed-form h-weighted integral of the damped two-step profile
// |1 - nu - e^{iw}|^2 (exposed for tests).
double antipgd_h_integral(double nu, const Spectrum& spectrum, double eta);

}  // namespace corrnoise::analysis
