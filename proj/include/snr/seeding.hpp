#pragma once

#include <cstdint>
#include <random>

namespace snr {

using Rng = std::mt19937_64;

// Stream tags keep the random draws of each generator independent.
enum class Stream : std::uint64_t {
  kDesign = 1,
  kCoefficients = 2,
  kNoise = 3,
  kNu = 4,
  kPermutation = 5,
  kDenseCoefficients = 6,
  kGroupPhi = 7,
  kOracle = 8,
};

/// Counter-based seed derivation: a pure function of its three arguments.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, Stream stream);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag);

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace snr
