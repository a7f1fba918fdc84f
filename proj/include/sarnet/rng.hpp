#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sarnet {

// SplitMix64 finalizer. Used to turn small structured keys into
// well-mixed 64-bit engine seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash-combines (seed, k0, k1, ...) into one stream key, so that e.g.
// (base_seed, cell, replication, stage) tuples index independent RNG
// substreams no matter how the work is scheduled.
inline std::uint64_t stream_key(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) {
    h = splitmix64(h ^ (k + 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> keys = {}) {
  return std::mt19937_64(stream_key(seed, keys));
}

}  // namespace sarnet
