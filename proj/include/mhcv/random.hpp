#pragma once

#include "mhcv/types.hpp"

#include <cstdint>
#include <initializer_list>

namespace mhcv {

// SplitMix64 finalizer; used to derive statistically independent stream
// seeds from (parent seed, tag...) tuples.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(parent);
  for (auto t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

/// Stream tags. Each consumer of randomness in a run gets its own stream.
enum class Stream : std::uint64_t {
  Path = 1,       // chain start + MH proposals/uniforms
  Auxiliary = 2,  // Y/Z draws of the per-step kernel estimate
  Matrix = 3,     // coarse transition-matrix estimation
  Diagnostic = 4, // rate-diagnostic Monte Carlo
};

inline Rng make_stream(std::uint64_t parent, Stream s, std::uint64_t index = 0) {
  return Rng(derive_seed(parent, {static_cast<std::uint64_t>(s), index}));
}

/// Uniform on (0, 1]; keeps draws strictly inside (lo, hi] cells.
inline double uniform_open_closed(Rng& rng) {
  return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace mhcv
