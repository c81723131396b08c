#pragma once

#include <cstdint>
#include <random>

namespace qsdc {

/// Engine used for every randomized operation in the library.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the independent substream `stream` under a session seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng substream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

// Bit-level helpers; unlike the <random> distributions their output does not
// depend on the standard library implementation.

template <class URBG>
int random_bit(URBG& rng) {
  return static_cast<int>(rng() >> 63);
}

template <class URBG>
double random_unit(URBG& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection; bound >= 1.
template <class URBG>
std::uint64_t random_below(URBG& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

template <class URBG>
bool bernoulli(URBG& rng, double p) {
  return random_unit(rng) < p;
}

}  // namespace qsdc
