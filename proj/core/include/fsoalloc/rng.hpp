#pragma once

#include <cstdint>
#include <random>

namespace fsoalloc {

/// Engine seeded from a (seed, stream) pair. Distinct streams give
/// decorrelated engines for the same user seed.
inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  // splitmix64 on the combined value; avoids correlated mt19937_64 states
  // for nearby seeds.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return std::mt19937_64(z);
}

}  // namespace fsoalloc
