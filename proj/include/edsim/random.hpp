#pragma once

#include <cstdint>
#include <random>

namespace edsim {

/// Random stream used by every stochastic operation.
using RandomStream = std::mt19937_64;

/// Independent draws within one trial. Each gets its own substream so that
/// changing one impairment never shifts the draws consumed by another.
enum class StreamTag : std::uint64_t {
  Signal = 1,
  Noise = 2,
  PhaseNoise = 3,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream for (seed, trial, tag); a pure function of its arguments.
inline RandomStream substream(std::uint64_t seed, std::uint64_t trial, StreamTag tag) {
  const std::uint64_t h =
      splitmix64(splitmix64(seed) ^ splitmix64((trial << 4) | static_cast<std::uint64_t>(tag)));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return RandomStream(seq);
}

}  // namespace edsim
