#pragma once

#include <functional>
#include <span>
#include <stdexcept>

// Quadrature engine and special-function layer: composite Gauss-Legendre
// integration on [-pi, pi], complete elliptic integrals, and the closed-form
// cosine integrals used by the sensitivity and suboptimality evaluators.
namespace corrnoise::spectral {

// Raised when a numerical routine hits a non-finite value or an internal
// consistency check fails; carries the offending location in the message.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureSpec {
  int panel_count = 4096;  // uniform base panels on [-pi, pi], >= 16
  bool refinement = true;  // dyadic subdivision of panels within |w| <= pi/64
  double abs_tol = 1e-9;
};

using Fn = std::function<double(double)>;

// Composite 5-point Gauss-Legendre approximation of the integral of f over
// [-pi, pi]. With refinement on, base panels intersecting |w| <= pi/64 are
// subdivided 8 extra levels (256 subpanels each). Throws numerical_error if
// a node evaluates to a non-finite value.
double integrate(const Fn& f, const QuadratureSpec& quad);

// Adaptive bisection quadrature of f over [lo, hi] (15-point Gauss-Legendre
// per interval). Used where singular or peaked integrands need locality.
double integrate_adaptive(const Fn& f, double lo, double hi, double abs_tol,
                          int max_depth = 48);

// Complete elliptic integral of the first kind K(k), 0 <= k < 1, computed by
// the arithmetic-geometric-mean iteration.
double ellip_K(double k);

// Complete elliptic integral of the third kind Pi(alpha^2, k) for
// alpha^2 < 1 and 0 <= k < 1, by adaptive quadrature of the defining
// integral. alpha^2 may be negative (circular case).
double ellip_Pi(double alpha_sq, double k);

// integral over [-pi,pi] of cos(l*w) / (a^2 + b^2 - 2*a*b*cos w)
//   = 2*pi / (a^2 - b^2) * (b/a)^|l|        for 0 < |b| < a.
double cos_kernel_integral(double a, double b, int l);

// I(a, b) = integral over [-pi,pi] of |1-a-e^{iw}| / |1-b-e^{iw}|^2 dw for
// a, b in (0,1). Evaluated via the elliptic closed forms (K for a == b,
// Pi otherwise); when quad.abs_tol <= 1e-7 a direct quadrature self-check
// runs and a disagreement beyond 1e4*abs_tol throws numerical_error.
double integral_I(double a, double b, const QuadratureSpec& quad);

// |1 - a - e^{iw}|^2 = 1 + (1-a)^2 - 2*(1-a)*cos w.
double one_pole_magnitude_sq(double a, double omega);

// h(w) = sum_j lambda_j / |1 - e^{iw} - eta*lambda_j|^2 over the descending
// eigenvalues; requires 0 < eta*lambda_1 < 1.
double h_omega(std::span<const double> lambda, double eta, double omega);

}  // namespace corrnoise::spectral
