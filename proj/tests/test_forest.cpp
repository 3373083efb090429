// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <gtest/gtest.h>

#include "upfi/error.hpp"
#include "upfi/forest.hpp"
#include "upfi/rng.hpp"
#include "upfi/synthetic.hpp"

namespace upfi {
namespace {

Dataset blobs(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  FeatureMatrix x(static_cast<Eigen::Index>(n), 2);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    const double center = c == 0 ? -2.0 : 2.0;
    x(static_cast<Eigen::Index>(i), 0) = center + 0.5 * rng.normal();
    x(static_cast<Eigen::Index>(i), 1) = center + 0.5 * rng.normal();
    y[i] = c + 1;
  }
  return Dataset(x, y, {"a", "b"}, TaskKind::classification(2), {"left", "right"});
}

ForestConfig small_config(std::uint64_t seed) {
  ForestConfig c;
  c.n_trees = 60;
  c.seed = seed;
  return c;
}

TEST(Forest, SeparableBlobsAccuracy) {
  const Dataset train = blobs(200, 1);
  const Dataset test = blobs(200, 2);
  const auto forest = CalibratedForest::fit(train, small_config(3));
  int correct = 0;
  for (std::size_t i = 0; i < test.num_rows(); ++i) {
    correct += forest.predict_proba(test.row(i)).argmax() == static_cast<int>(test.target()[i]);
  }
  EXPECT_GE(correct / 200.0, 0.95);
}

TEST(Forest, SingleClassRejected) {
  FeatureMatrix x(4, 1);
  x << 1, 2, 3, 4;
  const Dataset ds(x, {1, 1, 1, 1}, {"a"}, TaskKind::classification(2));
  EXPECT_THROW(CalibratedForest::fit(ds, small_config(1)), InputError);
}

TEST(Forest, RegressionDataRejected) {
  FeatureMatrix x(4, 1);
  x << 1, 2, 3, 4;
  const Dataset ds(x, {1.5, 1, 2, 4}, {"a"}, TaskKind::regression());
  EXPECT_THROW(CalibratedForest::fit(ds, small_config(1)), InputError);
}

TEST(Forest, DeterministicAndThreadIndependent) {
  const Dataset train = gen_mease({.n = 400, .seed = 5});
  ForestConfig c = small_config(9);
  const auto a = CalibratedForest::fit(train, c);
  c.threads = 3;
  const auto b = CalibratedForest::fit(train, c);
  ASSERT_EQ(a.trees().size(), b.trees().size());
  for (std::size_t t = 0; t < a.trees().size(); ++t) {
    ASSERT_EQ(a.trees()[t].nodes.size(), b.trees()[t].nodes.size());
    for (std::size_t k = 0; k < a.trees()[t].nodes.size(); ++k) {
      EXPECT_EQ(a.trees()[t].nodes[k].feature, b.trees()[t].nodes[k].feature);
      EXPECT_EQ(a.trees()[t].nodes[k].threshold, b.trees()[t].nodes[k].threshold);
    }
    EXPECT_EQ(a.trees()[t].leaf_values, b.trees()[t].leaf_values);
  }
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(a.calibration()[k].a, b.calibration()[k].a);
    EXPECT_EQ(a.calibration()[k].b, b.calibration()[k].b);
  }
}

TEST(Forest, DepthLimitRespected) {
  const Dataset train = gen_mease({.n = 500, .seed = 6});
  ForestConfig c = small_config(2);
  c.max_depth = 3;
  const auto forest = CalibratedForest::fit(train, c);
  for (const auto& t : forest.trees()) EXPECT_LE(t.depth, 3);
}

TEST(Forest, ProbabilitiesSumToOne) {
  const Dataset train = gen_mease({.n = 600, .seed = 7});
  const auto forest = CalibratedForest::fit(train, small_config(4));
  CounterRng rng(8);
  for (int q = 0; q < 1000; ++q) {
    std::vector<double> x(10);
    for (auto& v : x) v = rng.uniform(-0.5, 1.5);
    const auto p = forest.predict_proba(x);
    EXPECT_NEAR(p.probs()[0] + p.probs()[1], 1.0, 1e-9);
  }
}

TEST(Forest, UncalibratedEqualsMeanLeafFrequencies) {
  const Dataset train = gen_mease({.n = 300, .seed = 9});
  ForestConfig c = small_config(5);
  c.calibrate = false;
  const auto forest = CalibratedForest::fit(train, c);
  EXPECT_FALSE(forest.calibrated());
  for (std::size_t i = 0; i < 50; ++i) {
    const auto raw = forest.raw_scores(train.row(i));
    std::vector<double> manual(2, 0.0);
    for (const auto& t : forest.trees()) {
      const auto leaf = static_cast<std::size_t>(t.find_leaf(train.row(i)));
      manual[0] += t.leaf_values[2 * leaf];
      manual[1] += t.leaf_values[2 * leaf + 1];
    }
    for (auto& v : manual) v /= static_cast<double>(forest.trees().size());
    EXPECT_EQ(raw, manual);
    EXPECT_EQ(forest.predict_proba(train.row(i)).probs(), raw);
  }
}

TEST(Forest, CalibrationSlopesNonpositiveAndMonotone) {
  const Dataset train = gen_mease({.n = 1000, .seed = 10});
  const auto forest = CalibratedForest::fit(train, small_config(6));
  for (const auto& s : forest.calibration()) {
    EXPECT_LE(s.a, 0.0);
    double prev = s(0.0);
    for (double v = 0.05; v <= 1.0; v += 0.05) {
      EXPECT_GE(s(v), prev);
      prev = s(v);
    }
  }
}

TEST(Forest, UnanimousTreesGiveNearPointMassNeverOne) {
  DecisionTree leaf_only;
  leaf_only.nodes.push_back(TreeNode{});
  leaf_only.nodes[0].leaf = 0;
  leaf_only.leaf_values = {1.0, 0.0};
  const CalibratedForest forest({leaf_only, leaf_only}, {{-40.0, 20.0}, {-40.0, 20.0}}, 2, {"a"}, {"x", "y"});
  const std::vector<double> x{0.3};
  const auto p = forest.predict_proba(x);
  EXPECT_GT(p.probs()[0], 1.0 - 1e-8);
  EXPECT_LT(p.probs()[0], 1.0);
  EXPECT_GT(p.probs()[1], 0.0);
}

TEST(Forest, MaxFeaturesRules) {
  EXPECT_EQ(candidate_count(MaxFeatures::kSqrt, 10), 3);
  EXPECT_EQ(candidate_count(MaxFeatures::kLog2, 10), 3);
  EXPECT_EQ(candidate_count(MaxFeatures::kAll, 10), 10);
  EXPECT_EQ(candidate_count(MaxFeatures::kSqrt, 1), 1);
  EXPECT_EQ(parse_max_features("log2"), MaxFeatures::kLog2);
  EXPECT_THROW(parse_max_features("half"), InputError);
}

TEST(Tree, PureNodeIsLeafAndSplitIsMidpoint) {
  FeatureMatrix x(4, 1);
  x << 0, 1, 3, 4;
  const std::vector<int> classes{0, 0, 1, 1};
  const auto tree = grow_classification_tree(x, classes, 2, {0, 1, 2, 3}, -1, MaxFeatures::kAll, 1);
  ASSERT_EQ(tree.nodes.size(), 3u);
  EXPECT_EQ(tree.nodes[0].feature, 0);
  EXPECT_EQ(tree.nodes[0].threshold, 2.0);
  const std::vector<double> lo{0.5}, hi{3.5};
  EXPECT_EQ(tree.leaf_values[2 * static_cast<std::size_t>(tree.find_leaf(lo))], 1.0);
  EXPECT_EQ(tree.leaf_values[2 * static_cast<std::size_t>(tree.find_leaf(hi)) + 1], 1.0);
}

TEST(Tree, TieGoesToLowerFeatureIndex) {
  FeatureMatrix x(4, 2);
  x << 0, 0, 1, 1, 3, 3, 4, 4;
  const std::vector<int> classes{0, 0, 1, 1};
  const auto tree = grow_classification_tree(x, classes, 2, {0, 1, 2, 3}, -1, MaxFeatures::kAll, 1);
  EXPECT_EQ(tree.nodes[0].feature, 0);
}

RegressionForestConfig reg_config(std::uint64_t seed) {
  RegressionForestConfig c;
  c.seed = seed;
  return c;
}

TEST(RegressionForest, DuplicatedFeatureIsPredictable) {
  CounterRng rng(11);
  const std::size_t n = 600;
  FeatureMatrix x(n, 2);
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = rng.normal();
    x(static_cast<Eigen::Index>(i), 0) = v;
    x(static_cast<Eigen::Index>(i), 1) = rng.normal();
    target[i] = v;
  }
  const FeatureMatrix xtr = x.topRows(450), xte = x.bottomRows(150);
  const auto f = RegressionForest::fit(xtr, std::span(target).first(450), reg_config(1));
  EXPECT_GE(r_squared(std::span(target).subspan(450), f.predict(xte)), 0.95);
}

TEST(RegressionForest, PureNoiseIsNotPredictable) {
  CounterRng rng(12);
  const std::size_t n = 600;
  FeatureMatrix x(n, 3);
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(static_cast<Eigen::Index>(i), j) = rng.normal();
    target[i] = rng.normal();
  }
  const FeatureMatrix xtr = x.topRows(450), xte = x.bottomRows(150);
  const auto f = RegressionForest::fit(xtr, std::span(target).first(450), reg_config(2));
  EXPECT_LE(r_squared(std::span(target).subspan(450), f.predict(xte)), 0.1);
}

TEST(RegressionForest, InformativeTargetOnCorrelatedData) {
  const Dataset ds = gen_corr_regression({.n = 1000, .seed = 13});
  const FeatureMatrix xtr = ds.features().topRows(750), xte = ds.features().bottomRows(250);
  const auto f = RegressionForest::fit(xtr, std::span(ds.target()).first(750), reg_config(3));
  EXPECT_GT(r_squared(std::span(ds.target()).subspan(750), f.predict(xte)), 0.0);
}

TEST(RegressionForest, RSquaredBasics) {
  const std::vector<double> t{1, 2, 3, 4};
  EXPECT_EQ(r_squared(t, t), 1.0);
  const std::vector<double> mean(4, 2.5);
  EXPECT_EQ(r_squared(t, mean), 0.0);
}

}  // namespace
}  // namespace upfi
