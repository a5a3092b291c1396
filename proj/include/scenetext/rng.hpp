#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace scenetext {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: distinct (parent, stream) pairs give independent streams,
/// and adding streams never shifts existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
  return mix64(parent ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// FNV-1a, used to turn scene and anchor ids into stream numbers.
constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace scenetext
