// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "upfi/curves.hpp"
#include "upfi/error.hpp"
#include "upfi/rng.hpp"

namespace upfi {
namespace {

Dataset random_test(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  FeatureMatrix x(static_cast<Eigen::Index>(n), 2);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(static_cast<Eigen::Index>(i), 0) = rng.uniform(-2, 2);
    x(static_cast<Eigen::Index>(i), 1) = rng.uniform(-2, 2);
    y[i] = x(static_cast<Eigen::Index>(i), 0) + rng.normal();
  }
  return Dataset(x, y, {"x1", "x2"}, TaskKind::regression());
}

FunctionModel sum_model() {
  return FunctionModel(TaskKind::regression(), 2, [](std::span<const double> v) -> PredictiveDistribution {
    return Gaussian(v[0] + v[1], 1.0);
  });
}

FunctionModel wiggly_model() {
  return FunctionModel(TaskKind::regression(), 2, [](std::span<const double> v) -> PredictiveDistribution {
    return Gaussian(std::sin(v[0]) * v[1], 0.2 + v[0] * v[0] * std::exp(-v[1] * v[1]));
  });
}

const std::vector<CurveMetric> kMetrics{CurveMetric::kMean, CurveMetric::kEntropy, CurveMetric::kNll};

TEST(Curves, ConstantModelGivesFlatRows) {
  const Dataset test = random_test(30, 1);
  const FunctionModel model(TaskKind::regression(), 2,
                            [](std::span<const double>) -> PredictiveDistribution { return Gaussian(1.0, 2.0); });
  const auto grid = make_grid(test, 0, {});
  for (CurveMetric m : kMetrics) {
    const auto c = compute_curves(model, test, 0, grid, m);
    for (Eigen::Index i = 0; i < c.ice.rows(); ++i) EXPECT_EQ(c.ice.row(i).maxCoeff(), c.ice.row(i).minCoeff());
  }
}

TEST(Curves, IgnoredFeatureIsFlat) {
  const Dataset test = random_test(40, 2);
  const FunctionModel model(TaskKind::regression(), 2, [](std::span<const double> v) -> PredictiveDistribution {
    return Gaussian(std::cos(v[1]), 0.5 + v[1] * v[1]);
  });
  const auto grid = make_grid(test, 0, {});
  for (CurveMetric m : kMetrics) {
    const auto c = compute_curves(model, test, 0, grid, m);
    for (Eigen::Index i = 0; i < c.ice.rows(); ++i) EXPECT_LE(c.ice.row(i).maxCoeff() - c.ice.row(i).minCoeff(), 1e-9);
    EXPECT_LE(*std::max_element(c.pdp.begin(), c.pdp.end()) - *std::min_element(c.pdp.begin(), c.pdp.end()), 1e-9);
  }
}

TEST(Curves, OwnValueReproducesOriginalMetric) {
  const Dataset test = random_test(12, 3);
  const auto model = wiggly_model();
  std::vector<double> grid(test.features().col(0).begin(), test.features().col(0).end());
  std::sort(grid.begin(), grid.end());
  for (CurveMetric m : kMetrics) {
    const auto c = compute_curves(model, test, 0, grid, m);
    for (std::size_t r = 0; r < c.ice_rows.size(); ++r) {
      const auto t = static_cast<Eigen::Index>(std::find(grid.begin(), grid.end(), c.origin_value[r]) - grid.begin());
      EXPECT_EQ(c.ice(static_cast<Eigen::Index>(r), t), c.origin_metric[r]);
    }
  }
}

TEST(Curves, AnalyticMeanIceIsShiftedLine) {
  const Dataset test = random_test(20, 4);
  const auto grid = make_grid(test, 0, GridSpec::linear(-3, 3, 13));
  const auto c = compute_curves(sum_model(), test, 0, grid, CurveMetric::kMean);
  for (std::size_t r = 0; r < c.ice_rows.size(); ++r) {
    const double shift = test.features()(static_cast<Eigen::Index>(c.ice_rows[r]), 1);
    for (std::size_t t = 0; t < grid.size(); ++t) {
      EXPECT_NEAR(c.ice(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)), grid[t] + shift, 1e-12);
    }
  }
}

TEST(Curves, PdpIsColumnMeanOfIce) {
  CounterRng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset test = random_test(5 + rng.below(50), rng.next_u64());
    const auto grid = make_grid(test, trial % 2, {});
    for (CurveMetric m : kMetrics) {
      const auto c = compute_curves(wiggly_model(), test, static_cast<std::size_t>(trial % 2), grid, m);
      for (std::size_t t = 0; t < grid.size(); ++t) {
        EXPECT_NEAR(c.pdp[t], c.ice.col(static_cast<Eigen::Index>(t)).mean(), 1e-9);
      }
    }
  }
}

TEST(Curves, RetentionDoesNotChangePdp) {
  const Dataset test = random_test(100, 6);
  const auto grid = make_grid(test, 0, {});
  const auto all = compute_curves(wiggly_model(), test, 0, grid, CurveMetric::kEntropy);
  CurveOptions opt;
  opt.max_curves = 7;
  opt.seed = 3;
  const auto few = compute_curves(wiggly_model(), test, 0, grid, CurveMetric::kEntropy, opt);
  EXPECT_EQ(all.pdp, few.pdp);
  EXPECT_EQ(few.ice.rows(), 7);
  EXPECT_EQ(few.ice_rows.size(), 7u);
  EXPECT_EQ(all.ice.rows(), 100);
  EXPECT_EQ(pdp_curve(wiggly_model(), test, 0, grid, CurveMetric::kEntropy), all.pdp);
  for (std::size_t r = 0; r < 7; ++r) {
    EXPECT_EQ(few.ice.row(static_cast<Eigen::Index>(r)), all.ice.row(static_cast<Eigen::Index>(few.ice_rows[r])));
    EXPECT_EQ(few.context.row(static_cast<Eigen::Index>(r)), test.features().row(static_cast<Eigen::Index>(few.ice_rows[r])));
  }
}

TEST(Curves, SubsampleContract) {
  EXPECT_EQ(subsample_ice(5, 10, 1), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(subsample_ice(100, 10, 4), subsample_ice(100, 10, 4));
  const auto s = subsample_ice(100, 10, 4);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
}

TEST(Curves, ThreadCountDoesNotMatter) {
  const Dataset test = random_test(60, 7);
  const auto grid = make_grid(test, 1, {});
  CurveOptions opt;
  opt.threads = 4;
  const auto a = compute_curves(wiggly_model(), test, 1, grid, CurveMetric::kNll);
  const auto b = compute_curves(wiggly_model(), test, 1, grid, CurveMetric::kNll, opt);
  EXPECT_EQ(a.ice, b.ice);
  EXPECT_EQ(a.pdp, b.pdp);
}

TEST(Grid, DefaultLinearSpansTestRange) {
  const Dataset test = random_test(50, 8);
  const auto grid = make_grid(test, 0, {});
  ASSERT_EQ(grid.size(), 50u);
  EXPECT_EQ(grid.front(), test.features().col(0).minCoeff());
  EXPECT_EQ(grid.back(), test.features().col(0).maxCoeff());
  EXPECT_TRUE(std::adjacent_find(grid.begin(), grid.end(), std::greater_equal<>()) == grid.end());
}

TEST(Grid, QuantileDeduplicates) {
  FeatureMatrix x(6, 1);
  x << 1, 1, 1, 1, 2, 3;
  const Dataset test(x, {}, {"a"}, TaskKind::regression());
  const auto grid = make_grid(test, 0, GridSpec::quantile(11));
  EXPECT_TRUE(std::adjacent_find(grid.begin(), grid.end(), std::greater_equal<>()) == grid.end());
  EXPECT_EQ(grid.front(), 1.0);
  EXPECT_EQ(grid.back(), 3.0);
}

TEST(Grid, Errors) {
  FeatureMatrix x(3, 1);
  x << 2, 2, 2;
  const Dataset test(x, {}, {"a"}, TaskKind::regression());
  EXPECT_THROW(make_grid(test, 0, {}), InputError);
  EXPECT_THROW(make_grid(test, 0, GridSpec::quantile(5)), InputError);
  EXPECT_THROW(make_grid(test, 0, GridSpec::linear(0, 1, 1)), InputError);
  EXPECT_THROW(compute_curves(sum_model(), random_test(5, 1), 0, {1.0, 0.5}, CurveMetric::kMean), InputError);
}

TEST(Curves, NllNeedsLabels) {
  const Dataset test = random_test(10, 9).without_targets();
  EXPECT_THROW(compute_curves(sum_model(), test, 0, {0.0, 1.0}, CurveMetric::kNll), InputError);
  EXPECT_NO_THROW(compute_curves(sum_model(), test, 0, {0.0, 1.0}, CurveMetric::kEntropy));
}

TEST(Curves, ClassificationTracesChosenClass) {
  FeatureMatrix x(4, 1);
  x << -1, -0.5, 0.5, 1;
  const Dataset test(x, {1, 1, 2, 2}, {"a"}, TaskKind::classification(2));
  const FunctionModel model(TaskKind::classification(2), 1, [](std::span<const double> v) -> PredictiveDistribution {
    const double p = 1.0 / (1.0 + std::exp(-3.0 * v[0]));
    return Categorical({1.0 - p, p});
  });
  const std::vector<double> grid{-1, 0, 1};
  const auto c2 = compute_curves(model, test, 0, grid, CurveMetric::kMean);
  EXPECT_EQ(c2.traced_class, 2);
  EXPECT_TRUE(std::is_sorted(c2.pdp.begin(), c2.pdp.end()));
  CurveOptions opt;
  opt.traced_class = 1;
  const auto c1 = compute_curves(model, test, 0, grid, CurveMetric::kMean, opt);
  for (std::size_t t = 0; t < grid.size(); ++t) EXPECT_NEAR(c1.pdp[t] + c2.pdp[t], 1.0, 1e-12);
  opt.traced_class = 3;
  EXPECT_THROW(compute_curves(model, test, 0, grid, CurveMetric::kMean, opt), InputError);
}

}  // namespace
}  // namespace upfi
