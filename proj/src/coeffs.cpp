#include "corrnoise/coeffs.hpp"

#include <stdexcept>

namespace corrnoise::coeffs {

Family family_from_string(std::string_view name) {
  if (name == "dpsgd") return Family::dpsgd;
  if (name == "nu") return Family::nu;
  if (name == "mean_optimal") return Family::mean_optimal;
  if (name == "anti_pgd") return Family::anti_pgd;
  if (name == "anti_pgd_damped") return Family::anti_pgd_damped;
  if (name == "fichtenberger") return Family::fichtenberger;
  throw std::invalid_argument("unknown coefficient family: " +
                              std::string(name));
}

std::string family_name(Family f) {
  switch (f) {
    case Family::dpsgd: return "dpsgd";
    case Family::nu: return "nu";
    case Family::mean_optimal: return "mean_optimal";
    case Family::anti_pgd: return "anti_pgd";
    case Family::anti_pgd_damped: return "anti_pgd_damped";
    case Family::fichtenberger: return "fichtenberger";
  }
  return "?";
}

double frac_binom(int t) {
  if (t < 0) throw std::invalid_argument("frac_binom: t must be >= 0");
  double b = 1.0;
  for (int k = 1; k <= t; ++k) {
    b *= (0.5 - (k - 1)) / k;
  }
  return b;
}

namespace {

// beta_t = (-1)^t * binom(1/2,t) * (1-nu)^t via the combined recurrence
// beta_t = beta_{t-1} * (1-nu) * (t - 3/2) / t, which keeps every factor
// O(1) regardless of t.
CoeffSeq nu_family(double nu, std::size_t T) {
  CoeffSeq out;
  out.values.resize(T);
  double b = 1.0;
  out.values[0] = 1.0;
  const double decay = 1.0 - nu;
  for (std::size_t t = 1; t < T; ++t) {
    b *= decay * (static_cast<double>(t) - 1.5) / static_cast<double>(t);
    out.values[t] = b;
  }
  return out;
}

CoeffSeq spike(std::size_t T, double second) {
  CoeffSeq out;
  out.values.assign(T, 0.0);
  out.values[0] = 1.0;
  if (T > 1) out.values[1] = second;
  return out;
}

}  // namespace

CoeffSeq make_coeffs(Family family, double param, std::size_t T) {
  if (T == 0) throw std::invalid_argument("make_coeffs: T must be >= 1");
  switch (family) {
    case Family::dpsgd:
      return spike(T, 0.0);
    case Family::nu:
      // nu = 0 is admitted; it reproduces the fichtenberger coefficients.
      if (!(param >= 0.0 && param < 1.0)) {
        throw std::invalid_argument("make_coeffs: nu requires 0 <= param < 1");
      }
      return nu_family(param, T);
    case Family::mean_optimal:
      if (!(param > 0.0 && param <= 1.0)) {
        throw std::invalid_argument(
            "make_coeffs: mean_optimal requires 0 < param <= 1");
      }
      return nu_family(param, T);
    case Family::anti_pgd:
      return spike(T, -1.0);
    case Family::anti_pgd_damped:
      if (!(param > 0.0 && param < 1.0)) {
        throw std::invalid_argument(
            "make_coeffs: anti_pgd_damped requires 0 < param < 1");
      }
      return spike(T, -(1.0 - param));
    case Family::fichtenberger:
      return nu_family(0.0, T);
  }
  throw std::invalid_argument("make_coeffs: bad family");
}

}  // namespace corrnoise::coeffs
