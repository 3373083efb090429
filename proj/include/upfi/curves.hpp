// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "upfi/dataset.hpp"
#include "upfi/model.hpp"

namespace upfi {

/// What an ICE/PDP curve traces: the predictive mean (class probability for
/// classifiers), the predictive entropy, or the nll of the true target.
enum class CurveMetric { kMean, kEntropy, kNll };

std::string to_string(CurveMetric metric);
CurveMetric parse_curve_metric(const std::string& name);

struct GridSpec {
  enum class Kind { kLinear, kQuantile };
  Kind kind = Kind::kLinear;
  int points = 50;
  std::optional<double> min;  // linear only; default test-set min of the feature
  std::optional<double> max;

  static GridSpec linear(double lo, double hi, int points) { return {Kind::kLinear, points, lo, hi}; }
  static GridSpec quantile(int points) { return {Kind::kQuantile, points, std::nullopt, std::nullopt}; }
};

/// Strictly increasing evaluation grid for feature j; InputError if fewer
/// than 2 distinct points result.
std::vector<double> make_grid(const Dataset& test, std::size_t j, const GridSpec& spec);

struct CurveOptions {
  int traced_class = 2;                  // class traced by kMean on classifiers
  std::optional<std::size_t> max_curves;  // ICE retention; PDP always uses every row
  std::uint64_t seed = 0;                // for ICE subsampling
  unsigned threads = 1;
};

/// ICE matrix (retained rows x grid) and PDP for one feature and metric.
/// For every retained curve, origin_value/origin_metric hold the example's
/// own feature value and its unmodified metric, and context holds the
/// example's full feature row.
struct CurveSet {
  std::size_t feature = 0;
  std::string feature_name;
  CurveMetric metric = CurveMetric::kMean;
  int traced_class = 0;  // 0 unless metric == kMean on a classifier
  std::vector<double> grid;
  std::vector<std::size_t> ice_rows;
  Eigen::MatrixXd ice;
  std::vector<double> pdp;
  std::vector<double> origin_value;
  std::vector<double> origin_metric;
  FeatureMatrix context;
};

/// Seeded subset of row indices in ascending order; all rows if max_curves >= n.
std::vector<std::size_t> subsample_ice(std::size_t n, std::size_t max_curves, std::uint64_t seed);

/// ICE and PDP in one pass: ice[i][t] is the metric at (x_-j of row i, grid[t])
/// and pdp[t] is its mean over all test rows.
CurveSet compute_curves(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                        const std::vector<double>& grid, CurveMetric metric, const CurveOptions& options = {});

inline CurveSet ice_curves(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                           const std::vector<double>& grid, CurveMetric metric, const CurveOptions& options = {}) {
  return compute_curves(model, test, j, grid, metric, options);
}

/// PDP only (ICE not retained).
std::vector<double> pdp_curve(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                              const std::vector<double>& grid, CurveMetric metric, const CurveOptions& options = {});

}  // namespace upfi
