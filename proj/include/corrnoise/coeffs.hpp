#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Noise-coefficient sequences: the first column of the lower-triangular
// Toeplitz operator B that correlates the injected Gaussian noise.
namespace corrnoise::coeffs {

enum class Family {
  dpsgd,           // (1, 0, ...): independent noise
  nu,              // (-1)^t * binom(1/2, t) * (1-nu)^t
  mean_optimal,    // nu family with nu = eta
  anti_pgd,        // (1, -1, 0, ...)
  anti_pgd_damped, // (1, -(1-nu), 0, ...)
  fichtenberger,   // nu family with nu = 0
};

Family family_from_string(std::string_view name);
std::string family_name(Family f);

struct CoeffSeq {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t t) const { return values[t]; }
};

// Fractional binomial coefficient binom(1/2, t) = prod_{k<t} (1/2-k)/(t-k),
// computed by the running-product recurrence b_t = b_{t-1}*(1/2-(t-1))/t.
double frac_binom(int t);

// Materializes T coefficients of the requested family. `param` is nu for the
// nu/anti_pgd_damped families (0 < param < 1) and eta for mean_optimal
// (0 < param <= 1); it is ignored by dpsgd, anti_pgd, and fichtenberger.
// Throws std::invalid_argument for T = 0 or param outside its range.
CoeffSeq make_coeffs(Family family, double param, std::size_t T);

}  // namespace corrnoise::coeffs
