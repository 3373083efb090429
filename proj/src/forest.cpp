// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "upfi/error.hpp"
#include "upfi/parallel.hpp"
#include "upfi/rng.hpp"

namespace upfi {

int DecisionTree::find_leaf(std::span<const double> x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].leaf;
}

int candidate_count(MaxFeatures rule, std::size_t d) {
  const double dd = static_cast<double>(d);
  switch (rule) {
    case MaxFeatures::kSqrt:
      return std::max(1, static_cast<int>(std::sqrt(dd)));
    case MaxFeatures::kLog2:
      return std::max(1, static_cast<int>(std::log2(dd)));
    case MaxFeatures::kAll:
      break;
  }
  return static_cast<int>(d);
}

std::string to_string(MaxFeatures rule) {
  switch (rule) {
    case MaxFeatures::kSqrt:
      return "sqrt";
    case MaxFeatures::kLog2:
      return "log2";
    case MaxFeatures::kAll:
      break;
  }
  return "all";
}

MaxFeatures parse_max_features(const std::string& name) {
  if (name == "sqrt") return MaxFeatures::kSqrt;
  if (name == "log2") return MaxFeatures::kLog2;
  if (name == "all") return MaxFeatures::kAll;
  throw InputError("unknown max-features rule '" + name + "' (valid: sqrt, log2, all)");
}

namespace {

// Midpoint between consecutive distinct sorted values; falls back to the
// lower value when rounding lands on the upper one.
double midpoint(double lo, double hi) {
  const double mid = lo / 2.0 + hi / 2.0;
  return (mid >= hi || !std::isfinite(mid)) ? lo : mid;
}

struct SplitChoice {
  double score = -std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;

  // Higher score wins; ties go to the lower feature index, then lower threshold.
  bool consider(double s, int f, double t) {
    if (s > score || (s == score && (f < feature || (f == feature && t < threshold)))) {
      score = s;
      feature = f;
      threshold = t;
      return true;
    }
    return false;
  }
};

class ClassificationBuilder {
 public:
  ClassificationBuilder(const FeatureMatrix& x, std::span<const int> classes, int k, int max_depth, MaxFeatures rule,
                        std::uint64_t key)
      : x_(x), classes_(classes), k_(k), max_depth_(max_depth), mtry_(candidate_count(rule, static_cast<std::size_t>(x.cols()))), rng_(key) {}

  DecisionTree run(std::vector<std::size_t> rows) {
    build(rows, 0);
    return std::move(tree_);
  }

 private:
  int build(std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.depth = std::max(tree_.depth, depth);

    std::vector<double> counts(static_cast<std::size_t>(k_), 0.0);
    for (std::size_t r : rows) counts[static_cast<std::size_t>(classes_[r])] += 1.0;
    const int present = static_cast<int>(std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }));
    const bool depth_limited = max_depth_ >= 0 && depth >= max_depth_;
    if (present <= 1 || rows.size() < 2 || depth_limited) return make_leaf(index, counts, rows.size());

    const SplitChoice best = find_split(rows);
    if (best.feature < 0) return make_leaf(index, counts, rows.size());

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (x_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  SplitChoice find_split(const std::vector<std::size_t>& rows) {
    const auto d = static_cast<std::size_t>(x_.cols());
    const auto order = random_permutation(d, rng_);
    const std::size_t n = rows.size();
    SplitChoice best;
    int visited = 0;
    std::vector<std::pair<double, int>> items(n);
    std::vector<double> left(static_cast<std::size_t>(k_)), right(static_cast<std::size_t>(k_));
    for (std::size_t f : order) {
      if (visited >= mtry_) break;
      for (std::size_t i = 0; i < n; ++i) {
        items[i] = {x_(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(f)), classes_[rows[i]]};
      }
      std::sort(items.begin(), items.end());
      if (items.front().first == items.back().first) continue;  // constant here; does not count
      ++visited;
      std::fill(left.begin(), left.end(), 0.0);
      std::fill(right.begin(), right.end(), 0.0);
      for (const auto& it : items) right[static_cast<std::size_t>(it.second)] += 1.0;
      double left_sq = 0.0, right_sq = 0.0;
      for (double c : right) right_sq += c * c;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(items[i].second);
        left_sq += 2.0 * left[c] + 1.0;
        right_sq -= 2.0 * right[c] - 1.0;
        left[c] += 1.0;
        right[c] -= 1.0;
        if (items[i].first == items[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        // Minimizing weighted Gini == maximizing sum of squared counts over child size.
        best.consider(left_sq / nl + right_sq / nr, static_cast<int>(f), midpoint(items[i].first, items[i + 1].first));
      }
    }
    return best;
  }

  int make_leaf(int index, const std::vector<double>& counts, std::size_t n) {
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.leaf = static_cast<int>(tree_.leaf_values.size() / static_cast<std::size_t>(k_));
    for (double c : counts) tree_.leaf_values.push_back(c / static_cast<double>(n));
    return index;
  }

  const FeatureMatrix& x_;
  std::span<const int> classes_;
  int k_;
  int max_depth_;
  int mtry_;
  CounterRng rng_;
  DecisionTree tree_;
};

std::vector<std::size_t> bootstrap(std::span<const std::size_t> pool, CounterRng& rng) {
  std::vector<std::size_t> rows(pool.size());
  for (auto& r : rows) r = pool[static_cast<std::size_t>(rng.below(pool.size()))];
  return rows;
}

bool covers_all_classes(std::span<const std::size_t> rows, std::span<const int> classes, int k) {
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (std::size_t r : rows) seen[static_cast<std::size_t>(classes[r])] = true;
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

}  // namespace

DecisionTree grow_classification_tree(const FeatureMatrix& x, std::span<const int> classes, int num_classes,
                                      std::vector<std::size_t> rows, int max_depth, MaxFeatures rule,
                                      std::uint64_t key) {
  if (rows.empty()) throw InputError("cannot grow a tree on zero rows");
  return ClassificationBuilder(x, classes, num_classes, max_depth, rule, key).run(std::move(rows));
}

CalibratedForest::CalibratedForest(std::vector<DecisionTree> trees, std::vector<SigmoidCalibration> calibration,
                                   int num_classes, std::vector<std::string> feature_names,
                                   std::vector<std::string> class_labels)
    : trees_(std::move(trees)),
      calibration_(std::move(calibration)),
      num_classes_(num_classes),
      feature_names_(std::move(feature_names)),
      class_labels_(std::move(class_labels)) {
  if (trees_.empty()) throw InputError("forest needs at least one tree");
  if (num_classes_ < 2) throw InputError("forest needs at least 2 classes");
  if (!calibration_.empty() && calibration_.size() != static_cast<std::size_t>(num_classes_)) {
    throw InputError("forest needs one sigmoid per class");
  }
  if (class_labels_.size() != static_cast<std::size_t>(num_classes_)) throw InputError("class label count mismatch");
  for (const auto& tree : trees_) {
    if (tree.nodes.empty()) throw InputError("forest contains an empty tree");
    if (tree.leaf_values.size() % static_cast<std::size_t>(num_classes_) != 0) {
      throw InputError("tree leaf values do not match class count");
    }
  }
}

CalibratedForest CalibratedForest::fit(const Dataset& train, const ForestConfig& config) {
  if (!train.task().is_classification()) {
    throw InputError("calibrated forest needs a classification dataset, got " + train.task().to_string());
  }
  if (!train.has_targets()) throw InputError("forest training data has no targets");
  if (config.n_trees < 1) throw InputError("n_trees must be >= 1");
  const int k = train.task().num_classes;
  const std::size_t n = train.num_rows();
  std::vector<int> classes(n);
  for (std::size_t i = 0; i < n; ++i) classes[i] = static_cast<int>(train.target()[i]) - 1;

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (!covers_all_classes(all, classes, k)) {
    throw InputError("forest training data must contain every class (single-class or missing-class data)");
  }

  std::vector<std::size_t> forest_rows = all;
  std::vector<std::size_t> calib_rows;
  std::uint64_t attempt_used = 0;
  if (config.calibrate) {
    if (!(config.calib_fraction > 0.0 && config.calib_fraction < 1.0)) {
      throw InputError("calibration fraction must lie in (0, 1)");
    }
    const std::size_t n_calib = static_cast<std::size_t>(std::llround(config.calib_fraction * static_cast<double>(n)));
    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 10 && !ok; ++attempt) {
      CounterRng rng(derive_key(config.seed, "calibration-split", {attempt}));
      const auto order = random_permutation(n, rng);
      const std::span<const std::size_t> view(order);
      if (n_calib < 1 || n_calib >= n) break;
      forest_rows.assign(view.begin(), view.end() - static_cast<std::ptrdiff_t>(n_calib));
      calib_rows.assign(view.end() - static_cast<std::ptrdiff_t>(n_calib), view.end());
      ok = covers_all_classes(forest_rows, classes, k) && covers_all_classes(calib_rows, classes, k);
      attempt_used = attempt;
    }
    if (!ok) throw FitError("could not draw a calibration split containing every class in 10 attempts");
  }

  std::vector<DecisionTree> trees(static_cast<std::size_t>(config.n_trees));
  parallel_for(trees.size(), config.threads, [&](std::size_t t) {
    CounterRng rng(derive_key(config.seed, "tree", {attempt_used, t}));
    auto rows = bootstrap(forest_rows, rng);
    trees[t] = grow_classification_tree(train.features(), classes, k, std::move(rows), config.max_depth,
                                        config.max_features, rng.next_u64());
  });

  CalibratedForest forest(std::move(trees), {}, k, train.feature_names(), train.class_labels());
  if (!config.calibrate) return forest;

  std::vector<std::vector<double>> scores(static_cast<std::size_t>(k));
  for (std::size_t r : calib_rows) {
    const auto s = forest.raw_scores(train.row(r));
    for (int c = 0; c < k; ++c) scores[static_cast<std::size_t>(c)].push_back(s[static_cast<std::size_t>(c)]);
  }
  std::vector<SigmoidCalibration> sigmoids;
  for (int c = 0; c < k; ++c) {
    std::vector<int> labels;
    labels.reserve(calib_rows.size());
    for (std::size_t r : calib_rows) labels.push_back(classes[r] == c ? 1 : 0);
    sigmoids.push_back(fit_sigmoid_calibration(scores[static_cast<std::size_t>(c)], labels,
                                               PlattOptions{.nonpositive_slope = true}));
  }
  forest.calibration_ = std::move(sigmoids);
  return forest;
}

std::vector<double> CalibratedForest::raw_scores(std::span<const double> x) const {
  if (x.size() != num_features()) throw InputError("forest input has wrong width");
  const auto k = static_cast<std::size_t>(num_classes_);
  std::vector<double> s(k, 0.0);
  for (const auto& tree : trees_) {
    const auto leaf = static_cast<std::size_t>(tree.find_leaf(x));
    for (std::size_t c = 0; c < k; ++c) s[c] += tree.leaf_values[leaf * k + c];
  }
  for (double& v : s) v /= static_cast<double>(trees_.size());
  return s;
}

Categorical CalibratedForest::predict_proba(std::span<const double> x) const {
  std::vector<double> s = raw_scores(x);
  if (calibration_.empty()) return Categorical(std::move(s));
  double total = 0.0;
  for (std::size_t c = 0; c < s.size(); ++c) {
    s[c] = std::clamp(calibration_[c](s[c]), kProbabilityFloor, 1.0);
    total += s[c];
  }
  for (double& p : s) p /= total;
  return Categorical(std::move(s));
}

PredictiveDistribution CalibratedForest::predict_dist(std::span<const double> x) const { return predict_proba(x); }

}  // namespace upfi
