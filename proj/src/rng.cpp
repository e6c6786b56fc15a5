#include "corrnoise/rng.hpp"

#include <cmath>

namespace corrnoise::rng {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t u =
      (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
  // 53 mantissa bits, offset by half an ulp to stay inside (0, 1).
  return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Block philox(std::uint64_t seed, std::uint32_t c0, std::uint32_t c1,
             std::uint32_t c2, std::uint32_t c3) {
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  std::uint32_t x0 = c0, x1 = c1, x2 = c2, x3 = c3;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, x0, hi0, lo0);
    mulhilo(kMul1, x2, hi1, lo1);
    const std::uint32_t y0 = hi1 ^ x1 ^ k0;
    const std::uint32_t y1 = lo1;
    const std::uint32_t y2 = hi0 ^ x3 ^ k1;
    const std::uint32_t y3 = lo0;
    x0 = y0;
    x1 = y1;
    x2 = y2;
    x3 = y3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return Block{{x0, x1, x2, x3}};
}

double uniform(std::uint64_t seed, std::uint32_t stream, std::uint64_t step,
               std::uint32_t coord) {
  const Block b = philox(seed, static_cast<std::uint32_t>(step),
                         static_cast<std::uint32_t>(step >> 32), coord,
                         stream << 16);
  return to_unit(b.x[0], b.x[1]);
}

double gaussian(std::uint64_t seed, std::uint32_t stream, std::uint64_t step,
                std::uint32_t coord) {
  // Polar method: each rejection attempt consumes one block (two uniforms).
  for (std::uint32_t attempt = 0;; ++attempt) {
    const Block b = philox(seed, static_cast<std::uint32_t>(step),
                           static_cast<std::uint32_t>(step >> 32), coord,
                           (stream << 16) | (attempt & 0xFFFFu));
    const double v1 = 2.0 * to_unit(b.x[0], b.x[1]) - 1.0;
    const double v2 = 2.0 * to_unit(b.x[2], b.x[3]) - 1.0;
    const double s = v1 * v1 + v2 * v2;
    if (s > 0.0 && s < 1.0) {
      return v1 * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace corrnoise::rng
