// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "upfi/calibration.hpp"
#include "upfi/error.hpp"
#include "upfi/rng.hpp"

namespace upfi {
namespace {

TEST(Platt, BeatsFixedCandidateOnTwoPoints) {
  const std::vector<double> s{-1.0, 1.0};
  const std::vector<int> t{0, 1};
  const auto fit = fit_sigmoid_calibration(s, t);
  EXPECT_LE(platt_loss(s, t, fit.a, fit.b), platt_loss(s, t, -1.0, 0.0));
}

TEST(Platt, LossMatchesOracleObjective) {
  CounterRng rng(201);
  std::vector<double> s(30);
  std::vector<int> t(30);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    t[i] = rng.bernoulli(s[i]) ? 1 : 0;
  }
  t[0] = 0;
  t[1] = 1;
  for (double a : {-5.0, -1.0, 0.0, 2.0}) {
    for (double b : {-2.0, 0.0, 1.5}) EXPECT_NEAR(platt_loss(s, t, a, b), oracle::platt_objective(s, t, a, b), 1e-10);
  }
}

TEST(Platt, MatchesGridSearch) {
  CounterRng rng(202);
  std::vector<double> s(20);
  std::vector<int> t(20);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    t[i] = rng.bernoulli(0.15 + 0.7 * s[i]) ? 1 : 0;
  }
  t[0] = 0;
  t[1] = 1;
  const auto fit = fit_sigmoid_calibration(s, t);
  const auto grid = oracle::platt_grid_search(s, t);
  EXPECT_LE(oracle::platt_objective(s, t, fit.a, fit.b), grid.loss + 1e-6);
  EXPECT_NEAR(fit.a, grid.a, 0.05);
  EXPECT_NEAR(fit.b, grid.b, 0.05);
}

TEST(Platt, MatchesRefinedGridSearchTwoSided) {
  CounterRng rng(203);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> s(40);
    std::vector<int> t(40);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = rng.uniform();
      t[i] = rng.bernoulli(0.1 + 0.8 * s[i]) ? 1 : 0;
    }
    t[0] = 0;
    t[1] = 1;
    const auto fit = fit_sigmoid_calibration(s, t);
    const auto grid = oracle::platt_zoom_search(s, t);
    EXPECT_NEAR(oracle::platt_objective(s, t, fit.a, fit.b), grid.loss, 1e-6);
  }
}

TEST(Platt, FlippingLabelsFlipsSlope) {
  const std::vector<double> s{0.1, 0.2, 0.35, 0.5, 0.6, 0.8, 0.9};
  const std::vector<int> t{0, 0, 1, 0, 1, 1, 1};
  std::vector<int> flipped;
  for (int v : t) flipped.push_back(1 - v);
  const auto a = fit_sigmoid_calibration(s, t);
  const auto b = fit_sigmoid_calibration(s, flipped);
  EXPECT_LT(a.a, 0.0);
  EXPECT_GT(b.a, 0.0);
  EXPECT_NEAR(platt_loss(s, t, a.a, a.b), platt_loss(s, flipped, -a.a, -a.b), 1e-9);
  EXPECT_NEAR(a.a, -b.a, 1e-6);
  EXPECT_NEAR(a.b, -b.b, 1e-6);
}

TEST(Platt, NonpositiveSlopeConstraint) {
  const std::vector<double> s{0.1, 0.2, 0.35, 0.5, 0.6, 0.8, 0.9};
  const std::vector<int> t{1, 1, 0, 1, 0, 0, 0};
  const auto fit = fit_sigmoid_calibration(s, t, PlattOptions{.nonpositive_slope = true});
  EXPECT_LE(fit.a, 0.0);
  EXPECT_EQ(fit.a, 0.0);
  EXPECT_NEAR(fit(0.3), fit(0.9), 0.0);
}

TEST(Platt, MonotoneWhenSlopeNonpositive) {
  const SigmoidCalibration c{-3.0, 1.0};
  double prev = c(-2.0);
  for (double s = -1.9; s < 2.0; s += 0.1) {
    EXPECT_GE(c(s), prev);
    prev = c(s);
  }
}

TEST(Platt, RejectsSingleLabel) {
  const std::vector<double> s{0.1, 0.2};
  EXPECT_THROW(fit_sigmoid_calibration(s, std::vector<int>{1, 1}), InputError);
  EXPECT_THROW(fit_sigmoid_calibration(s, std::vector<int>{0, 2}), InputError);
}

TEST(Platt, NonConvergenceIsCalibrationError) {
  const std::vector<double> s{0.1, 0.2, 0.35, 0.5, 0.6, 0.8, 0.9};
  const std::vector<int> t{0, 0, 1, 0, 1, 1, 1};
  EXPECT_THROW(fit_sigmoid_calibration(s, t, PlattOptions{.max_iterations = 1}), CalibrationError);
}

}  // namespace
}  // namespace upfi
