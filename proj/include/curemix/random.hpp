#pragma once

#include <cstdint>
#include <random>

namespace curemix {

//! SplitMix64 finaliser of (seed, stream); gives every replicate its own
//! stream so results do not depend on scheduling order.
inline std::uint64_t
derive_seed(std::uint64_t seed, std::uint64_t stream)
{
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64
stream_rng(std::uint64_t seed, std::uint64_t stream)
{
  return std::mt19937_64(derive_seed(seed, stream));
}

} // namespace curemix
