// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <random>

namespace avguard {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates seed/stream pairs.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng make_rng(uint64_t seed, uint64_t stream = 0) {
  return Rng(mix64(mix64(seed) ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 1)));
}

}  // namespace avguard
