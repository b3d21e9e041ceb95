#pragma once

#include <cstdint>
#include <random>
#include <string_view>

// Deterministic seed derivation. Every parallel unit of work (shot, scan
// point, mixture term) gets its own generator seeded from the root seed and a
// stable stream index, so results do not depend on thread scheduling.

namespace iontrap {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t derive_seed(uint64_t root, uint64_t stream) {
  return splitmix64(splitmix64(root) ^ splitmix64(stream + 0x5851f42d4c957f2dULL));
}

inline uint64_t derive_seed(uint64_t root, std::string_view label, uint64_t stream) {
  return derive_seed(root ^ fnv1a64(label), stream);
}

inline std::mt19937_64 make_rng(uint64_t root, uint64_t stream) {
  return std::mt19937_64(derive_seed(root, stream));
}

}  // namespace iontrap
