#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "corrnoise/spectral.hpp"

// Convex-program upper bound on the asymptotic suboptimality for smooth
// strongly convex losses: frequency-domain multipliers lambda, the spectral
// weight psi obtained pointwise from a 2x2 PSD constraint, and alternating
// minimization over the noise profile |B(w)|^2.
namespace corrnoise::convex_bound {

struct MultiplierSeq {
  int t_max = 0;
  std::vector<double> lam;  // lambda_{-t_max..t_max}, index t + t_max

  explicit MultiplierSeq(int window);
  double& at(int t) { return lam[static_cast<std::size_t>(t + t_max)]; }
  double at(int t) const { return lam[static_cast<std::size_t>(t + t_max)]; }
  // lambda_t >= 0 for all t and sum_t lambda_t <= 2*lambda_0 (equality ok).
  bool valid(double tol = 1e-12) const;
};

struct ConvexClass {
  double mu = 0.0;
  double L = 0.0;
  double eta = 0.0;
  double G = 1.0;
  double sigma_sgd = 0.0;
  double rho = 1.0;
  int d = 1;
};

// DTFT of the multipliers over the finite support: sum_t lambda_t e^{-iwt}.
std::complex<double> lambda_dtft(const MultiplierSeq& lam, double omega);

// Minimal psi >= 0 such that diag(-eta^2, psi) - A*(w) Mtilde_lambda(w) A(w)
// is PSD, via the Schur complement of the 2x2 Hermitian form. Returns
// nullopt when the (1,1) entry cannot be made nonnegative (including the
// N11 = 0, N12 != 0 corner).
std::optional<double> min_psi(double omega, const MultiplierSeq& lam,
                              const ConvexClass& cls);

// Smallest eigenvalue of N(w) for a candidate psi: the independent
// certificate check behind every feasibility claim.
double min_eig_N(double omega, const MultiplierSeq& lam,
                 const ConvexClass& cls, double psi);

// Uniform midpoint grid of k points on [-pi, pi].
std::vector<double> omega_grid(int grid_k);

// (L*d / (2 pi eta^2)) * sum_j (G^2 rho^{-1} |B(w_j)|^2 gamma_inf^2(B)
//                               + sigma_sgd^2) * psi_min(w_j) * dw.
// gamma_inf is evaluated adaptively from bmagsq (grid-independent).
// Returns nullopt when any grid point is infeasible; +infinity when the
// sensitivity diverges.
std::optional<double> bound_value(const spectral::Fn& bmagsq,
                                  const MultiplierSeq& lam,
                                  const ConvexClass& cls, int grid_k);

struct OptimizeResult {
  MultiplierSeq lam;
  double bound = 0.0;
  bool feasible = false;
  int iterations = 0;
};

// Derivative-free search over symmetric multipliers: single-spike
// initializations, projected coordinate descent (negatives clipped, tail
// rescaled to keep sum <= 2*lambda_0), and seeded random probes. The
// incumbent never worsens. Deterministic given seed.
OptimizeResult optimize_lambda(const spectral::Fn& bmagsq,
                               const ConvexClass& cls, int grid_k, int t_max,
                               int budget, std::uint64_t seed);
// Same, warm-started from a previous multiplier sequence.
OptimizeResult optimize_lambda(const spectral::Fn& bmagsq,
                               const ConvexClass& cls, int grid_k, int t_max,
                               int budget, std::uint64_t seed,
                               const MultiplierSeq& init);

// Cauchy-Schwarz step of the alternating minimization: |B(w)|^2 proportional
// to_1/sqrt(psi(w)) on the grid, normalized so the value nearest w = pi is 1.
// Rejects nonpositive psi.
std::vector<double> optimize_B(std::span<const double> psi_grid,
                               const ConvexClass& cls);

// Piecewise-linear symmetric interpolant of grid values (|w| lookup).
spectral::Fn grid_profile(std::vector<double> values, int grid_k);

struct AlternatingResult {
  std::vector<double> bmagsq_grid;
  MultiplierSeq lam{0};
  double bound = 0.0;
  bool feasible = false;
  int rounds = 0;
  std::vector<double> bound_history;  // nonincreasing by the incumbent rule
};

// Alternates optimize_lambda and optimize_B starting from the given profile;
// stops after 20 rounds or relative change < 1e-4, whichever first.
AlternatingResult optimize_profile(const spectral::Fn& init_bmagsq,
                                   const ConvexClass& cls, int grid_k,
                                   int t_max, int budget, std::uint64_t seed);

}  // namespace corrnoise::convex_bound
