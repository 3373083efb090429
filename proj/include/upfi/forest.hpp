// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "upfi/calibration.hpp"
#include "upfi/dataset.hpp"
#include "upfi/model.hpp"

namespace upfi {

/// Flat binary tree. Internal nodes route x[feature] <= threshold to `left`.
/// Leaves have feature == -1 and `leaf` indexing the owning tree's leaf values.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf = -1;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;       // nodes[0] is the root
  std::vector<double> leaf_values;   // classification: leaves x k frequencies; regression: one mean per leaf
  int depth = 0;

  /// Index of the leaf x falls into.
  int find_leaf(std::span<const double> x) const;
};

enum class MaxFeatures { kSqrt, kLog2, kAll };

/// Number of candidate features per split for d features.
int candidate_count(MaxFeatures rule, std::size_t d);
std::string to_string(MaxFeatures rule);
MaxFeatures parse_max_features(const std::string& name);

struct ForestConfig {
  int n_trees = 500;
  int max_depth = 8;  // < 0 means unlimited
  double calib_fraction = 0.2;
  bool calibrate = true;
  MaxFeatures max_features = MaxFeatures::kSqrt;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Random forest classifier (bootstrap, Gini, random feature candidates per
/// split) whose raw class scores (mean leaf frequencies) are calibrated one
/// class at a time with a Platt sigmoid and renormalized.
class CalibratedForest final : public ProbabilisticModel {
 public:
  /// Trees are grown on the first (1 - calib_fraction) of a seeded shuffle of
  /// the training rows; the sigmoids are fitted on the rest. If a class is
  /// missing from either part the shuffle is redrawn, up to 10 attempts.
  static CalibratedForest fit(const Dataset& train, const ForestConfig& config);

  /// Assembles a forest from stored parts (empty calibration = uncalibrated).
  CalibratedForest(std::vector<DecisionTree> trees, std::vector<SigmoidCalibration> calibration, int num_classes,
                   std::vector<std::string> feature_names, std::vector<std::string> class_labels);

  TaskKind task() const override { return TaskKind::classification(num_classes_); }
  std::size_t num_features() const override { return feature_names_.size(); }
  PredictiveDistribution predict_dist(std::span<const double> x) const override;

  /// Mean leaf class frequencies over trees.
  std::vector<double> raw_scores(std::span<const double> x) const;
  Categorical predict_proba(std::span<const double> x) const;

  const std::vector<DecisionTree>& trees() const { return trees_; }
  const std::vector<SigmoidCalibration>& calibration() const { return calibration_; }
  bool calibrated() const { return !calibration_.empty(); }
  int num_classes() const { return num_classes_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& class_labels() const { return class_labels_; }

 private:
  std::vector<DecisionTree> trees_;
  std::vector<SigmoidCalibration> calibration_;
  int num_classes_ = 2;
  std::vector<std::string> feature_names_;
  std::vector<std::string> class_labels_;
};

/// Grows one Gini classification tree on `rows` (duplicates act as weights).
/// Exposed for testing; the forest calls it once per tree.
DecisionTree grow_classification_tree(const FeatureMatrix& x, std::span<const int> classes, int num_classes,
                                      std::vector<std::size_t> rows, int max_depth, MaxFeatures rule,
                                      std::uint64_t key);

struct RegressionForestConfig {
  int n_trees = 100;
  int max_depth = -1;
  MaxFeatures max_features = MaxFeatures::kAll;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Point-prediction forest (bootstrap, variance reduction, fully grown by default).
class RegressionForest {
 public:
  static RegressionForest fit(const FeatureMatrix& x, std::span<const double> y, const RegressionForestConfig& config);

  double predict(std::span<const double> x) const;
  std::vector<double> predict(const FeatureMatrix& x) const;

  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
};

/// Coefficient of determination 1 - SS_res / SS_tot.
double r_squared(std::span<const double> truth, std::span<const double> predicted);

}  // namespace upfi
