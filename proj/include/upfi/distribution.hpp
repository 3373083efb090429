// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace upfi {

/// Task a model/dataset pair solves. Classification labels are class indices
/// in [1, num_classes], stored as doubles in target vectors.
struct TaskKind {
  enum class Kind { kRegression, kClassification };

  Kind kind = Kind::kRegression;
  int num_classes = 0;  // >= 2 for classification, 0 for regression

  static TaskKind regression() { return {Kind::kRegression, 0}; }
  static TaskKind classification(int k);

  bool is_regression() const { return kind == Kind::kRegression; }
  bool is_classification() const { return kind == Kind::kClassification; }

  std::string to_string() const;

  friend bool operator==(const TaskKind&, const TaskKind&) = default;
};

/// Categorical distribution over classes 1..k.
class Categorical {
 public:
  /// Validates: k >= 2, all probabilities >= 0, sum within 1e-9 of 1.
  explicit Categorical(std::vector<double> probs);

  const std::vector<double>& probs() const { return probs_; }
  int num_classes() const { return static_cast<int>(probs_.size()); }

  /// Probability of class index c in [1, k].
  double prob(int c) const { return probs_.at(static_cast<std::size_t>(c - 1)); }

  /// Class with the highest probability; ties go to the lowest index.
  int argmax() const;

 private:
  std::vector<double> probs_;
};

/// Normal distribution; variance must be strictly positive.
class Gaussian {
 public:
  Gaussian(double mean, double variance);

  double mean() const { return mean_; }
  double variance() const { return variance_; }

 private:
  double mean_;
  double variance_;
};

/// A model's predictive distribution q(Y | x).
using PredictiveDistribution = std::variant<Categorical, Gaussian>;

/// Entropy in nats. Shannon entropy (0 log 0 := 0) for Categorical,
/// differential entropy 1/2 + 1/2 ln(2 pi var) for Gaussian.
double entropy(const PredictiveDistribution& dist);
double entropy(const Categorical& dist);
double entropy(const Gaussian& dist);

/// Probabilities below this are raised to it before taking the log in nll().
inline constexpr double kProbabilityFloor = 1e-12;

/// -log q(y) in nats. For Categorical, y is a class index in [1, k] and the
/// probability is clamped below at kProbabilityFloor. Throws InputError for an
/// out-of-range or non-integral class index, or a non-finite y.
double nll(const PredictiveDistribution& dist, double y);
double nll(const Categorical& dist, double y);
double nll(const Gaussian& dist, double y);

/// Point summary: mean for Gaussian, probability of `cls` for Categorical.
double predictive_mean(const PredictiveDistribution& dist, int cls);

bool matches(const PredictiveDistribution& dist, const TaskKind& task);

}  // namespace upfi
