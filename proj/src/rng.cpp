// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

namespace upfi {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
}

std::uint64_t derive_key(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = mix64(parent ^ 0x5851f42d4c957f2dull);
  for (std::uint64_t component : path) key = mix64(key ^ mix64(component + kGolden));
  return key;
}

std::uint64_t derive_key(std::uint64_t parent, std::string_view purpose,
                         std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = derive_key(parent, {fnv1a64(purpose)});
  for (std::uint64_t component : path) key = mix64(key ^ mix64(component + kGolden));
  return key;
}

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double CounterRng::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

void shuffle(std::span<std::size_t> values, CounterRng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(values[i - 1], values[j]);
  }
}

std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  shuffle(perm, rng);
  return perm;
}

}  // namespace upfi
