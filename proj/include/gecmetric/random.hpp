#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace gecmetric {

// Generator for a sub-stream keyed by (seed, a, b). std::seed_seq output is
// fully specified, so streams are identical across platforms and schedules.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

// Uniform integer in [0, n). Multiply-shift keeps the mapping independent of
// the standard library's distribution implementation.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

// Fisher-Yates prefix: k distinct indices from [0, n), returned sorted.
inline std::vector<std::size_t> sample_without_replacement(std::mt19937_64& rng, std::size_t n,
                                                           std::size_t k) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + uniform_index(rng, n - i)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Sattolo's algorithm: a uniformly random cyclic permutation, which has no
// fixed points when n >= 2.
inline std::vector<std::size_t> random_derangement(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i-- > 1;) std::swap(perm[i], perm[uniform_index(rng, i)]);
  return perm;
}

}  // namespace gecmetric
