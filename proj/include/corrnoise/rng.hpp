#pragma once

#include <cstdint>

// Counter-based random numbers (Philox 4x32-10). Every draw is a pure
// function of (seed, stream, step, coord), so runs are reproducible across
// thread schedules and noise can be regenerated for verification.
namespace corrnoise::rng {

// Disjoint stream ids used across the project.
enum Stream : std::uint32_t {
  kDpNoise = 1,
  kCovariate = 2,
  kResidual = 3,
  kSearch = 4,
  kTest = 9,
};

struct Block {
  std::uint32_t x[4];
};

// One Philox 4x32-10 block for counter (c0, c1, c2, c3) under key `seed`.
Block philox(std::uint64_t seed, std::uint32_t c0, std::uint32_t c1,
             std::uint32_t c2, std::uint32_t c3);

// Uniform double in (0, 1), one block per draw.
double uniform(std::uint64_t seed, std::uint32_t stream, std::uint64_t step,
               std::uint32_t coord);

// Standard normal via the polar (Marsaglia) method on a per-(stream, step,
// coord) rejection substream.
double gaussian(std::uint64_t seed, std::uint32_t stream, std::uint64_t step,
                std::uint32_t coord);

// SplitMix64-style mix, used to derive per-trial child seeds.
std::uint64_t mix(std::uint64_t seed, std::uint64_t salt);

}  // namespace corrnoise::rng
