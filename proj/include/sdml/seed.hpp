#pragma once

#include <cstdint>
#include <initializer_list>

namespace sdml {

/// Seed derived from a root seed and a path of indices (splitmix64 chain).
/// All randomness in a run flows from one root seed through this function.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  const auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(root);
  for (std::uint64_t p : path) h = mix(h ^ mix(p));
  return h;
}

}  // namespace sdml
