// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/curves.hpp"

#include <algorithm>
#include <cmath>

#include "upfi/error.hpp"
#include "upfi/parallel.hpp"
#include "upfi/rng.hpp"

namespace upfi {

std::string to_string(CurveMetric metric) {
  switch (metric) {
    case CurveMetric::kMean:
      return "mean";
    case CurveMetric::kEntropy:
      return "entropy";
    case CurveMetric::kNll:
      break;
  }
  return "nll";
}

CurveMetric parse_curve_metric(const std::string& name) {
  if (name == "mean") return CurveMetric::kMean;
  if (name == "entropy") return CurveMetric::kEntropy;
  if (name == "nll" || name == "likelihood") return CurveMetric::kNll;
  throw InputError("unknown curve metric '" + name + "'; valid metrics: mean, entropy, nll");
}

std::vector<double> make_grid(const Dataset& test, std::size_t j, const GridSpec& spec) {
  if (j >= test.num_features()) throw InputError("feature index out of range for grid");
  if (spec.points < 2) throw InputError("grid needs at least 2 points");
  const auto col = test.features().col(static_cast<Eigen::Index>(j));
  std::vector<double> grid;
  if (spec.kind == GridSpec::Kind::kLinear) {
    const double lo = spec.min.value_or(col.minCoeff());
    const double hi = spec.max.value_or(col.maxCoeff());
    if (!(lo < hi)) throw InputError("linear grid needs min < max");
    const double step = (hi - lo) / static_cast<double>(spec.points - 1);
    for (int t = 0; t < spec.points; ++t) grid.push_back(t + 1 == spec.points ? hi : lo + step * t);
  } else {
    std::vector<double> sorted(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    const double last = static_cast<double>(sorted.size() - 1);
    for (int t = 0; t < spec.points; ++t) {
      const double pos = last * static_cast<double>(t) / static_cast<double>(spec.points - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
      const double frac = pos - static_cast<double>(lo);
      const double v = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
      if (grid.empty() || v > grid.back()) grid.push_back(v);
    }
  }
  if (grid.size() < 2) throw InputError("grid collapsed to fewer than 2 distinct points");
  return grid;
}

std::vector<std::size_t> subsample_ice(std::size_t n, std::size_t max_curves, std::uint64_t seed) {
  std::vector<std::size_t> rows;
  if (max_curves >= n) {
    rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    return rows;
  }
  CounterRng rng(derive_key(seed, "ice-subsample", {n}));
  rows = random_permutation(n, rng);
  rows.resize(max_curves);
  std::sort(rows.begin(), rows.end());
  return rows;
}

namespace {

double metric_value(const PredictiveDistribution& dist, const Dataset& test, std::size_t i, CurveMetric metric,
                    int traced_class) {
  switch (metric) {
    case CurveMetric::kMean:
      return predictive_mean(dist, traced_class);
    case CurveMetric::kEntropy:
      return entropy(dist);
    case CurveMetric::kNll:
      break;
  }
  return nll(dist, test.target()[i]);
}

struct FullCurves {
  Eigen::MatrixXd values;  // n x g
  std::vector<double> origin;
  int traced_class = 0;
};

FullCurves evaluate(const ProbabilisticModel& model, const Dataset& test, std::size_t j, const std::vector<double>& grid,
                    CurveMetric metric, const CurveOptions& options) {
  if (!(model.task() == test.task())) throw InputError("model task does not match data task");
  if (model.num_features() != test.num_features()) throw InputError("model and data disagree on feature count");
  if (j >= test.num_features()) throw InputError("feature index out of range");
  if (grid.size() < 2) throw InputError("grid needs at least 2 points");
  for (std::size_t t = 1; t < grid.size(); ++t) {
    if (!(grid[t] > grid[t - 1])) throw InputError("grid must be strictly increasing");
  }
  if (metric == CurveMetric::kNll && !test.has_targets()) throw InputError("nll curves need target labels");
  FullCurves out;
  if (metric == CurveMetric::kMean && test.task().is_classification()) {
    if (options.traced_class < 1 || options.traced_class > test.task().num_classes) {
      throw InputError("traced class " + std::to_string(options.traced_class) + " out of range");
    }
    out.traced_class = options.traced_class;
  }

  const std::size_t n = test.num_rows();
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size()));
  const auto base = model.predict_batch(test.features());
  for (std::size_t i = 0; i < n; ++i) out.origin.push_back(metric_value(base[i], test, i, metric, out.traced_class));

  parallel_for(grid.size(), options.threads, [&](std::size_t t) {
    FeatureMatrix x = test.features();
    x.col(static_cast<Eigen::Index>(j)).setConstant(grid[t]);
    const auto preds = model.predict_batch(x);
    for (std::size_t i = 0; i < n; ++i) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
          metric_value(preds[i], test, i, metric, out.traced_class);
    }
  });
  return out;
}

std::vector<double> column_means(const Eigen::MatrixXd& values) {
  std::vector<double> out(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index t = 0; t < values.cols(); ++t) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) total += values(i, t);
    out[static_cast<std::size_t>(t)] = total / static_cast<double>(values.rows());
  }
  return out;
}

}  // namespace

CurveSet compute_curves(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                        const std::vector<double>& grid, CurveMetric metric, const CurveOptions& options) {
  FullCurves full = evaluate(model, test, j, grid, metric, options);
  CurveSet out;
  out.feature = j;
  out.feature_name = test.feature_names()[j];
  out.metric = metric;
  out.traced_class = full.traced_class;
  out.grid = grid;
  out.pdp = column_means(full.values);
  const std::size_t n = test.num_rows();
  out.ice_rows = options.max_curves ? subsample_ice(n, *options.max_curves, options.seed) : subsample_ice(n, n, 0);
  const auto kept = static_cast<Eigen::Index>(out.ice_rows.size());
  out.ice.resize(kept, full.values.cols());
  out.context.resize(kept, static_cast<Eigen::Index>(test.num_features()));
  for (Eigen::Index r = 0; r < kept; ++r) {
    const auto i = static_cast<Eigen::Index>(out.ice_rows[static_cast<std::size_t>(r)]);
    out.ice.row(r) = full.values.row(i);
    out.context.row(r) = test.features().row(i);
    out.origin_value.push_back(test.features()(i, static_cast<Eigen::Index>(j)));
    out.origin_metric.push_back(full.origin[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<double> pdp_curve(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                              const std::vector<double>& grid, CurveMetric metric, const CurveOptions& options) {
  return column_means(evaluate(model, test, j, grid, metric, options).values);
}

}  // namespace upfi
