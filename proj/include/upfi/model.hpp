// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "upfi/dataset.hpp"
#include "upfi/distribution.hpp"

namespace upfi {

/// Anything that maps a feature vector to a predictive distribution.
///
/// Implementations must be deterministic at predict time (no internal RNG),
/// total on finite inputs, and safe to call concurrently. Every distribution
/// returned must match task().
class ProbabilisticModel {
 public:
  virtual ~ProbabilisticModel() = default;

  virtual TaskKind task() const = 0;
  virtual std::size_t num_features() const = 0;
  virtual PredictiveDistribution predict_dist(std::span<const double> x) const = 0;

  /// One distribution per row of x. Overrides must return exactly what
  /// predict_dist returns for each row.
  virtual std::vector<PredictiveDistribution> predict_batch(const FeatureMatrix& x) const {
    std::vector<PredictiveDistribution> out;
    out.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(predict_dist(row_span(x, i)));
    return out;
  }
};

/// Adapter turning a callable into a model. Handy for analytic models and
/// for wrapping predictors defined outside this library.
class FunctionModel final : public ProbabilisticModel {
 public:
  using Fn = std::function<PredictiveDistribution(std::span<const double>)>;

  FunctionModel(TaskKind task, std::size_t num_features, Fn fn)
      : task_(task), num_features_(num_features), fn_(std::move(fn)) {}

  TaskKind task() const override { return task_; }
  std::size_t num_features() const override { return num_features_; }
  PredictiveDistribution predict_dist(std::span<const double> x) const override { return fn_(x); }

 private:
  TaskKind task_;
  std::size_t num_features_;
  Fn fn_;
};

}  // namespace upfi
