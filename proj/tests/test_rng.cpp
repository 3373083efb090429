// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "upfi/rng.hpp"

namespace upfi {
namespace {

TEST(Rng, SplitMixReferenceValues) {
  // First outputs of the reference SplitMix64 generator seeded with 0.
  EXPECT_EQ(mix64(0x9e3779b97f4a7c15ull), 0xe220a8397b1dcdafull);
  EXPECT_EQ(mix64(2 * 0x9e3779b97f4a7c15ull), 0x6e789e6aa1b965f4ull);
  CounterRng rng(0);
  EXPECT_EQ(rng.next_u64(), 0xe220a8397b1dcdafull);
  EXPECT_EQ(rng.next_u64(), 0x6e789e6aa1b965f4ull);
  EXPECT_EQ(rng.next_u64(), 0x06c45d188009454full);
}

TEST(Rng, Fnv1aReference) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Rng, DerivedKeysDependOnOrderAndPurpose) {
  EXPECT_NE(derive_key(7, {1, 2}), derive_key(7, {2, 1}));
  EXPECT_NE(derive_key(7, "permutation", {1}), derive_key(7, "split", {1}));
  EXPECT_EQ(derive_key(7, "permutation", {3, 4}), derive_key(7, "permutation", {3, 4}));
  EXPECT_NE(derive_key(7, {}), derive_key(8, {}));
}

TEST(Rng, SameKeySameStream) {
  CounterRng a(derive_key(42, "x")), b(derive_key(42, "x"));
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformMoments) {
  CounterRng rng(5);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 0.005);
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12.0, 0.002);
}

TEST(Rng, NormalMoments) {
  CounterRng rng(6);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(Rng, BelowIsInRangeAndRoughlyUniform) {
  CounterRng rng(7);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, PermutationIsValidAndUniformOnSmallN) {
  CounterRng rng(8);
  std::map<std::vector<std::size_t>, int> seen;
  const int trials = 60000;
  for (int t = 0; t < trials; ++t) {
    auto p = random_permutation(3, rng);
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    ASSERT_EQ(sorted, (std::vector<std::size_t>{0, 1, 2}));
    ++seen[p];
  }
  ASSERT_EQ(seen.size(), 6u);
  for (const auto& [perm, count] : seen) EXPECT_NEAR(count, trials / 6, 400);
}

}  // namespace
}  // namespace upfi
