// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace upfi {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a. Used to turn purpose strings into key material.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Derive a child key from a parent key and a tuple of indices.
///
/// Each component is absorbed as key := mix64(key ^ mix64(component + golden)),
/// so (seed, a, b) and (seed, b, a) give unrelated keys. The scheme uses only
/// 64-bit integer arithmetic and is therefore identical on every platform.
std::uint64_t derive_key(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept;

/// Same as derive_key, with a purpose string hashed in first.
std::uint64_t derive_key(std::uint64_t parent, std::string_view purpose,
                         std::initializer_list<std::uint64_t> path = {}) noexcept;

/// Counter-based generator: draw i of a stream is mix64(key + (i + 1) * golden).
///
/// Streams are addressed by key, so any work unit can reconstruct its own
/// stream from (seed, purpose, indices) without sharing state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ull);
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, bound) by Lemire's multiply-and-reject method.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Uniform random permutation of {0, ..., n-1} (Fisher-Yates).
std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng);

/// In-place Fisher-Yates shuffle.
void shuffle(std::span<std::size_t> values, CounterRng& rng);

}  // namespace upfi
