#pragma once

#include <cstdint>
#include <random>

namespace pmc {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream tags keep seed lineages for different pipeline stages disjoint.
enum class StreamKind : std::uint64_t {
  exploration = 0x45585031ULL,  // "EXP1"
  subspace = 0x53554231ULL,     // "SUB1"
  chain = 0x43484131ULL,        // "CHA1"
  resample = 0x52455331ULL,     // "RES1"
  benchmark = 0x42454E31ULL,    // "BEN1"
};

/// Counter-based stream split: deterministic and collision-free in `index`
/// for a fixed master seed and kind, so results do not depend on the order
/// in which parallel consumers are scheduled.
inline std::uint64_t derive_seed(std::uint64_t master, StreamKind kind,
                                 std::uint64_t index) {
  return mix64(mix64(master ^ static_cast<std::uint64_t>(kind)) + index);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace pmc
