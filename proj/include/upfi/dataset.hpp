// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "upfi/distribution.hpp"

namespace upfi {

/// n x d, one example per row. Row-major so a row is a contiguous span.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const FeatureMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Immutable table of examples.
///
/// Invariants: n >= 1, d >= 1, every entry finite, feature names unique, and
/// (when labels are present) classification targets are integral class
/// indices in [1, k]. `class_labels` holds the original name of class c at
/// position c - 1. A dataset may carry no targets (`has_targets() == false`),
/// which is enough for entropy-based measures.
class Dataset {
 public:
  Dataset(FeatureMatrix features, std::vector<double> target, std::vector<std::string> feature_names,
          TaskKind task, std::vector<std::string> class_labels = {});

  const FeatureMatrix& features() const { return features_; }
  const std::vector<double>& target() const { return target_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& class_labels() const { return class_labels_; }
  const TaskKind& task() const { return task_; }

  std::size_t num_rows() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t num_features() const { return static_cast<std::size_t>(features_.cols()); }
  bool has_targets() const { return !target_.empty(); }

  std::span<const double> row(std::size_t i) const { return row_span(features_, static_cast<Eigen::Index>(i)); }

  /// Column index for a feature name; InputError listing valid names otherwise.
  std::size_t feature_index(std::string_view name) const;

  /// Rows in the given order (duplicates allowed).
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Same targets/names/task with a replacement feature matrix of equal shape.
  Dataset with_features(FeatureMatrix features) const;

  /// Copy without targets.
  Dataset without_targets() const;

 private:
  FeatureMatrix features_;
  std::vector<double> target_;
  std::vector<std::string> feature_names_;
  TaskKind task_;
  std::vector<std::string> class_labels_;
};

struct CsvOptions {
  std::string target_column = "y";
  TaskKind::Kind kind = TaskKind::Kind::kRegression;
  /// Classification only: fixed label order. When empty, labels are mapped to
  /// 1..k in order of first appearance. With a fixed order, unknown labels are
  /// an ingestion error.
  std::vector<std::string> class_labels;
  /// Accept a file that lacks the target column (dataset without targets).
  bool target_optional = false;
};

/// Comma-separated, header row first, '.' decimal point, no quoting. Lines
/// starting with '#' are skipped. Throws IngestError naming the row/column.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);
Dataset parse_csv(std::string_view text, const CsvOptions& options);

/// Writes features followed by the target column (named `target_column`);
/// classification targets are written as their original labels. Numbers use
/// the shortest representation that parses back to the same double.
std::string to_csv(const Dataset& ds, std::string_view target_column = "y");
void write_csv(const Dataset& ds, const std::filesystem::path& path, std::string_view target_column = "y");

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

struct SplitSpec {
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
};

/// Number of training rows split() produces for n rows.
std::size_t train_size(std::size_t n, double train_fraction);

/// Seeded shuffle of row indices cut into (train, test). Deterministic in
/// (seed, n). InputError when either part would be empty.
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

/// Row indices of the seeded shuffle that split() cuts, train part first.
std::vector<std::size_t> split_order(std::size_t n, std::uint64_t seed);

/// Per-column affine scaling to zero mean / unit population sd, fitted on
/// training data. Constant columns are left untouched (mean 0, sd 1).
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> sd);

  static Standardizer fit(const FeatureMatrix& train);
  static Standardizer fit(const Dataset& train) { return fit(train.features()); }

  FeatureMatrix apply(const FeatureMatrix& x) const;
  FeatureMatrix invert(const FeatureMatrix& z) const;
  std::vector<double> apply(std::span<const double> x) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& sd() const { return sd_; }
  std::size_t size() const { return mean_.size(); }

 private:
  std::vector<double> mean_;
  std::vector<double> sd_;
};

}  // namespace upfi
