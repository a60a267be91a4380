#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rsreg {

/// splitmix64 finalizer; good avalanche, used to derive substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Substream seed derived from a master seed and a path of indices.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(seed ^ 0x5851f42d4c957f2dULL);
  for (std::uint64_t idx : path) s = mix64(s ^ mix64(idx + 0x14057b7ef767814fULL));
  return s;
}

/// Independent generator derived from a master seed and a path of indices.
/// The same (seed, path) always yields the same stream, so replications can
/// run in any order or thread count without changing results.
inline std::mt19937_64 substream(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  return std::mt19937_64(derive_seed(seed, path));
}

/// Uniform draw on (0,1).  Uses the top 53 bits of the engine output; the
/// +0.5 offset keeps the value strictly inside the open interval.
inline double uniform01(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1p-53;
}

}  // namespace rsreg
