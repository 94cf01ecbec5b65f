#pragma once

#include <cstdint>
#include <random>

namespace spi {

// splitmix64 finalizer; decorrelates seed/stream pairs so per-resolution or
// per-run substreams never share a prefix.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream = 0) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(mix_seed(seed, stream));
}

}  // namespace spi
