#pragma once

#include <cstdint>
#include <random>

namespace mmspace {

using Rng = std::mt19937_64;

/// Seed used by the CLI when `--seed` is omitted.
inline constexpr std::uint64_t kDefaultSeed = 20110907;

/// Independent stream seed for (base, stream) pairs: splitmix64 of base
/// combined with the stream index. Used wherever several logical streams
/// (moment entries, sequence indices, annealing chains) share a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace mmspace
