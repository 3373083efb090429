// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>

#include "upfi/error.hpp"
#include "upfi/forest.hpp"
#include "upfi/parallel.hpp"
#include "upfi/rng.hpp"

namespace upfi {

namespace {

class RegressionBuilder {
 public:
  RegressionBuilder(const FeatureMatrix& x, std::span<const double> y, int max_depth, MaxFeatures rule,
                    std::uint64_t key)
      : x_(x), y_(y), max_depth_(max_depth), mtry_(candidate_count(rule, static_cast<std::size_t>(x.cols()))), rng_(key) {}

  DecisionTree run(std::vector<std::size_t> rows) {
    build(rows, 0);
    return std::move(tree_);
  }

 private:
  int build(std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.depth = std::max(tree_.depth, depth);

    double sum = 0.0;
    bool constant_target = true;
    for (std::size_t r : rows) {
      sum += y_[r];
      constant_target = constant_target && y_[r] == y_[rows.front()];
    }
    const double mean = sum / static_cast<double>(rows.size());
    const bool depth_limited = max_depth_ >= 0 && depth >= max_depth_;
    if (constant_target || rows.size() < 2 || depth_limited) return make_leaf(index, mean);

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = -std::numeric_limits<double>::infinity();
    const auto order = random_permutation(static_cast<std::size_t>(x_.cols()), rng_);
    const std::size_t n = rows.size();
    std::vector<std::pair<double, double>> items(n);
    int visited = 0;
    for (std::size_t f : order) {
      if (visited >= mtry_) break;
      for (std::size_t i = 0; i < n; ++i) items[i] = {x_(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(f)), y_[rows[i]]};
      std::sort(items.begin(), items.end());
      if (items.front().first == items.back().first) continue;
      ++visited;
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += items[i].second;
        if (items[i].first == items[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        const double right_sum = sum - left_sum;
        // Minimizing child squared error == maximizing this proxy.
        const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
        double threshold = items[i].first / 2.0 + items[i + 1].first / 2.0;
        if (threshold >= items[i + 1].first) threshold = items[i].first;
        const int fi = static_cast<int>(f);
        if (score > best_score ||
            (score == best_score && (fi < best_feature || (fi == best_feature && threshold < best_threshold)))) {
          best_score = score;
          best_feature = fi;
          best_threshold = threshold;
        }
      }
    }
    if (best_feature < 0) return make_leaf(index, mean);

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (x_(static_cast<Eigen::Index>(r), best_feature) <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  int make_leaf(int index, double value) {
    tree_.nodes[static_cast<std::size_t>(index)].leaf = static_cast<int>(tree_.leaf_values.size());
    tree_.leaf_values.push_back(value);
    return index;
  }

  const FeatureMatrix& x_;
  std::span<const double> y_;
  int max_depth_;
  int mtry_;
  CounterRng rng_;
  DecisionTree tree_;
};

}  // namespace

RegressionForest RegressionForest::fit(const FeatureMatrix& x, std::span<const double> y,
                                       const RegressionForestConfig& config) {
  if (x.rows() < 1 || static_cast<std::size_t>(x.rows()) != y.size()) {
    throw InputError("regression forest needs matching, non-empty inputs and targets");
  }
  if (config.n_trees < 1) throw InputError("n_trees must be >= 1");
  const auto n = static_cast<std::size_t>(x.rows());
  RegressionForest forest;
  forest.trees_.resize(static_cast<std::size_t>(config.n_trees));
  parallel_for(forest.trees_.size(), config.threads, [&](std::size_t t) {
    CounterRng rng(derive_key(config.seed, "regression-tree", {t}));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    forest.trees_[t] = RegressionBuilder(x, y, config.max_depth, config.max_features, rng.next_u64()).run(std::move(rows));
  });
  return forest;
}

double RegressionForest::predict(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& tree : trees_) total += tree.leaf_values[static_cast<std::size_t>(tree.find_leaf(x))];
  return total / static_cast<double>(trees_.size());
}

std::vector<double> RegressionForest::predict(const FeatureMatrix& x) const {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = predict(row_span(x, i));
  return out;
}

double r_squared(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.size() != predicted.size() || truth.empty()) throw InputError("r_squared needs equal, non-empty inputs");
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace upfi
