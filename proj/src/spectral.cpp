#include "corrnoise/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <vector>

namespace corrnoise::spectral {
namespace {

constexpr double kPi = std::numbers::pi;

// 5-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGl5X[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                             0.5384693101056831, 0.9061798459386640};
constexpr double kGl5W[5] = {0.2369268850561891, 0.4786286704993665,
                             0.5688888888888889, 0.4786286704993665,
                             0.2369268850561891};

// 15-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGl15X[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGl15W[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

[[noreturn]] void throw_nonfinite(double omega, double value) {
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "non-finite integrand value %g at omega=%.17g", value, omega);
  throw numerical_error(buf);
}

double gl5_panel(const Fn& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double x = c + h * kGl5X[i];
    const double v = f(x);
    if (!std::isfinite(v)) throw_nonfinite(x, v);
    s += kGl5W[i] * v;
  }
  return s * h;
}

double gl15_panel(const Fn& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double x = c + h * kGl15X[i];
    const double v = f(x);
    if (!std::isfinite(v)) throw_nonfinite(x, v);
    s += kGl15W[i] * v;
  }
  return s * h;
}

// Compensated (Neumaier) accumulator: the composite rules sum ~1e5 panel
// values and plain summation loses ~1e-11 of 2pi.
struct Accum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// The error budget per subinterval is proportional to its length, so the
// accepted-leaf errors add up to about abs_tol over the whole range. Two
// guards keep peaked integrands from recursing forever: a roundoff floor
// (the two-level estimate cannot certify below ~eps times the local mass)
// and the depth cap.
double adaptive_rec(const Fn& f, double a, double b, double whole,
                    double tol_per_len, int depth) {
  const double m = 0.5 * (a + b);
  const double left = gl15_panel(f, a, m);
  const double right = gl15_panel(f, m, b);
  const double err = std::abs(left + right - whole);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  // Integrands with cancellation near a peak carry O(100 eps) relative noise
  // in their values, so the two-level estimate bottoms out at that level
  // times the local mass; splitting below it makes no progress.
  const double fp_floor = 1024.0 * eps * (std::abs(left) + std::abs(right));
  const bool at_spacing =
      (b - a) <= 32.0 * eps * std::max(std::abs(a), std::abs(b));
  if (err <= tol_per_len * (b - a) || err <= fp_floor || at_spacing ||
      depth <= 0) {
    return left + right;
  }
  return adaptive_rec(f, a, m, left, tol_per_len, depth - 1) +
         adaptive_rec(f, m, b, right, tol_per_len, depth - 1);
}

}  // namespace

double integrate(const Fn& f, const QuadratureSpec& quad) {
  if (quad.panel_count < 16) {
    throw std::invalid_argument("QuadratureSpec: panel_count must be >= 16");
  }
  const double width = 2.0 * kPi / quad.panel_count;
  const double refine_window = kPi / 64.0;
  Accum total;
  for (int p = 0; p < quad.panel_count; ++p) {
    const double a = -kPi + p * width;
    const double b = a + width;
    const bool near_zero =
        quad.refinement &&
        (std::min(std::abs(a), std::abs(b)) < refine_window ||
         (a < 0.0 && b > 0.0));
    if (!near_zero) {
      total.add(gl5_panel(f, a, b));
      continue;
    }
    // 8 extra bisection levels -> 256 equal subpanels.
    const int sub = 256;
    const double sw = width / sub;
    for (int s = 0; s < sub; ++s) {
      total.add(gl5_panel(f, a + s * sw, a + (s + 1) * sw));
    }
  }
  return total.value();
}

double integrate_adaptive(const Fn& f, double lo, double hi, double abs_tol,
                          int max_depth) {
  const double whole = gl15_panel(f, lo, hi);
  return adaptive_rec(f, lo, hi, whole, abs_tol / (hi - lo), max_depth);
}

double ellip_K(double k) {
  if (!(k >= 0.0 && k < 1.0)) {
    throw std::invalid_argument("ellip_K: modulus must satisfy 0 <= k < 1");
  }
  // AGM iteration: K = pi / (2 * agm(1, sqrt(1-k^2))).
  double a = 1.0;
  double g = std::sqrt((1.0 - k) * (1.0 + k));
  for (int i = 0; i < 64; ++i) {
    const double an = 0.5 * (a + g);
    const double gn = std::sqrt(a * g);
    a = an;
    g = gn;
    if (std::abs(a - g) <= 1e-13 * a) break;
  }
  return kPi / (a + g);
}

double ellip_Pi(double alpha_sq, double k) {
  if (!(k >= 0.0 && k < 1.0)) {
    throw std::invalid_argument("ellip_Pi: modulus must satisfy 0 <= k < 1");
  }
  if (!(alpha_sq < 1.0)) {
    throw std::invalid_argument("ellip_Pi: requires alpha^2 < 1");
  }
  const double k2 = k * k;
  auto integrand = [=](double w) {
    const double s2 = std::sin(w) * std::sin(w);
    return 1.0 / ((1.0 - alpha_sq * s2) * std::sqrt(1.0 - k2 * s2));
  };
  return integrate_adaptive(integrand, 0.0, kPi / 2.0, 1e-11);
}

double cos_kernel_integral(double a, double b, int l) {
  if (!(std::abs(b) > 0.0 && std::abs(b) < a)) {
    throw std::invalid_argument("cos_kernel_integral: requires 0 < |b| < a");
  }
  const double ratio = b / a;
  return 2.0 * kPi / (a * a - b * b) * std::pow(ratio, std::abs(l));
}

double one_pole_magnitude_sq(double a, double omega) {
  const double r = 1.0 - a;
  return 1.0 + r * r - 2.0 * r * std::cos(omega);
}

double integral_I(double a, double b, const QuadratureSpec& quad) {
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) {
    throw std::invalid_argument("integral_I: requires a, b in (0, 1)");
  }
  const double k = std::sqrt(1.0 - a) / (1.0 - 0.5 * a);
  double value;
  if (std::abs(a - b) <= 1e-9 * std::max(a, b)) {
    value = 4.0 / (2.0 - a) * ellip_K(k);
  } else {
    const double alpha_sq =
        (b * b * (1.0 - a) - a * a * (1.0 - b)) /
        (b * b * (1.0 - 0.5 * a) * (1.0 - 0.5 * a));
    value = 2.0 * a * a / (b * b * (1.0 - 0.5 * a)) * ellip_Pi(alpha_sq, k);
  }
  if (quad.abs_tol <= 1e-7) {
    auto integrand = [=](double w) {
      return std::sqrt(one_pole_magnitude_sq(a, w)) /
             one_pole_magnitude_sq(b, w);
    };
    const double check = integrate(integrand, quad);
    if (std::abs(check - value) > 1e4 * quad.abs_tol * std::max(1.0, value)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "integral_I self-check failed: closed form %.17g vs "
                    "quadrature %.17g at (a=%g, b=%g)",
                    value, check, a, b);
      throw numerical_error(buf);
    }
  }
  return value;
}

double h_omega(std::span<const double> lambda, double eta, double omega) {
  if (lambda.empty()) throw std::invalid_argument("h_omega: empty spectrum");
  // eta*lambda_max = 1 is admitted: the denominator is then exactly 1.
  if (!(eta * lambda[0] > 0.0 && eta * lambda[0] <= 1.0)) {
    throw std::invalid_argument("h_omega: requires 0 < eta*lambda_max <= 1");
  }
  const double cw = std::cos(omega);
  double s = 0.0;
  for (const double lj : lambda) {
    const double r = 1.0 - eta * lj;
    s += lj / (1.0 + r * r - 2.0 * r * cw);
  }
  return s;
}

}  // namespace corrnoise::spectral
