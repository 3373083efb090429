// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "upfi/distribution.hpp"
#include "upfi/error.hpp"
#include "upfi/rng.hpp"

namespace upfi {
namespace {

constexpr double kTol = 1e-9;
const double kTwoPi = 2.0 * std::numbers::pi;

TEST(Entropy, FairCoinIsLogTwo) {
  EXPECT_NEAR(entropy(Categorical({0.5, 0.5})), std::log(2.0), kTol);
  EXPECT_NEAR(entropy(Categorical({0.5, 0.5})), 0.693147, 5e-7);
}

TEST(Entropy, PointMassIsZero) { EXPECT_EQ(entropy(Categorical({1.0, 0.0})), 0.0); }

TEST(Entropy, GaussianVanishesAtCriticalVariance) {
  EXPECT_NEAR(entropy(Gaussian(3.7, 1.0 / (kTwoPi * std::numbers::e))), 0.0, kTol);
}

TEST(Entropy, StandardNormal) {
  EXPECT_NEAR(entropy(Gaussian(0.0, 1.0)), 0.5 + 0.5 * std::log(kTwoPi), kTol);
  EXPECT_NEAR(entropy(Gaussian(0.0, 1.0)), 1.418939, 5e-7);
}

TEST(Entropy, GaussianCanBeNegative) { EXPECT_LT(entropy(Gaussian(0.0, 0.01)), 0.0); }

TEST(Nll, GaussianAtMean) {
  EXPECT_NEAR(nll(Gaussian(0.0, 1.0), 0.0), 0.5 * std::log(kTwoPi), kTol);
  EXPECT_NEAR(nll(Gaussian(0.0, 1.0), 0.0), 0.918939, 5e-7);
}

TEST(Nll, CategoricalClassOne) {
  EXPECT_NEAR(nll(Categorical({0.25, 0.75}), 1.0), -std::log(0.25), kTol);
  EXPECT_NEAR(nll(Categorical({0.25, 0.75}), 1.0), 1.386294, 5e-7);
}

TEST(Nll, GaussianOffMean) {
  EXPECT_NEAR(nll(Gaussian(1.0, 4.0), 3.0), 0.5 * std::log(8.0 * std::numbers::pi) + 0.5, kTol);
  EXPECT_NEAR(nll(Gaussian(1.0, 4.0), 3.0), 2.112086, 5e-7);
}

TEST(Nll, ClampsZeroProbability) {
  EXPECT_NEAR(nll(Categorical({1.0, 0.0}), 2.0), -std::log(kProbabilityFloor), kTol);
}

TEST(Nll, RejectsBadClassIndex) {
  const Categorical c({0.2, 0.8});
  EXPECT_THROW(nll(c, 0.0), InputError);
  EXPECT_THROW(nll(c, 3.0), InputError);
  EXPECT_THROW(nll(c, 1.5), InputError);
  EXPECT_THROW(nll(Gaussian(0, 1), std::nan("")), InputError);
}

TEST(Distribution, RejectsInvalid) {
  EXPECT_THROW(Categorical({1.0}), InputError);
  EXPECT_THROW(Categorical({0.6, 0.6}), InputError);
  EXPECT_THROW(Categorical({-0.1, 1.1}), InputError);
  EXPECT_THROW(Gaussian(0.0, 0.0), InputError);
  EXPECT_THROW(Gaussian(0.0, -1.0), InputError);
}

TEST(Distribution, ArgmaxPrefersLowestIndexOnTies) {
  EXPECT_EQ(Categorical({0.4, 0.4, 0.2}).argmax(), 1);
  EXPECT_EQ(Categorical({0.1, 0.3, 0.6}).argmax(), 3);
}

std::vector<double> random_simplex(CounterRng& rng, int k) {
  std::vector<double> p(static_cast<std::size_t>(k));
  double total = 0.0;
  for (auto& v : p) total += (v = rng.uniform() + 1e-3);
  for (auto& v : p) v /= total;
  return p;
}

TEST(EntropyProperty, CategoricalBoundedByLogK) {
  CounterRng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(6));
    const double h = entropy(Categorical(random_simplex(rng, k)));
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(static_cast<double>(k)) + kTol);
  }
  for (int k = 2; k < 8; ++k) {
    EXPECT_NEAR(entropy(Categorical(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k))), std::log(k), kTol);
  }
}

TEST(EntropyProperty, ExpectedNllEqualsEntropy) {
  CounterRng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(6));
    const Categorical c(random_simplex(rng, k));
    double expected = 0.0;
    for (int cls = 1; cls <= k; ++cls) expected += c.prob(cls) * nll(c, cls);
    EXPECT_NEAR(expected, entropy(c), kTol);
  }
}

TEST(EntropyProperty, DoublingVarianceAddsHalfLogTwo) {
  CounterRng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const double v = std::exp(rng.uniform(-5.0, 5.0));
    EXPECT_NEAR(entropy(Gaussian(0.0, 2.0 * v)) - entropy(Gaussian(0.0, v)), 0.5 * std::log(2.0), kTol);
    EXPECT_LT(entropy(Gaussian(0.0, v)), entropy(Gaussian(0.0, v * 1.001)));
  }
}

TEST(EntropyProperty, GaussianNllMinimizedAtMean) {
  CounterRng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const Gaussian g(rng.uniform(-3.0, 3.0), std::exp(rng.uniform(-2.0, 2.0)));
    const double at_mean = nll(g, g.mean());
    EXPECT_LT(at_mean, nll(g, g.mean() + rng.uniform(1e-3, 2.0)));
    EXPECT_LT(at_mean, nll(g, g.mean() - rng.uniform(1e-3, 2.0)));
  }
}

TEST(Distribution, PredictiveMeanAndTaskMatch) {
  const PredictiveDistribution g = Gaussian(2.5, 1.0);
  const PredictiveDistribution c = Categorical({0.3, 0.7});
  EXPECT_EQ(predictive_mean(g, 2), 2.5);
  EXPECT_EQ(predictive_mean(c, 2), 0.7);
  EXPECT_TRUE(matches(g, TaskKind::regression()));
  EXPECT_FALSE(matches(g, TaskKind::classification(2)));
  EXPECT_TRUE(matches(c, TaskKind::classification(2)));
  EXPECT_FALSE(matches(c, TaskKind::classification(3)));
}

}  // namespace
}  // namespace upfi
