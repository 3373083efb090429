// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "upfi/error.hpp"
#include "upfi/rng.hpp"

namespace upfi {

namespace {

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::optional<double> parse_number(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

Dataset::Dataset(FeatureMatrix features, std::vector<double> target, std::vector<std::string> feature_names,
                 TaskKind task, std::vector<std::string> class_labels)
    : features_(std::move(features)),
      target_(std::move(target)),
      feature_names_(std::move(feature_names)),
      task_(task),
      class_labels_(std::move(class_labels)) {
  if (features_.rows() < 1 || features_.cols() < 1) throw InputError("dataset needs n >= 1 rows and d >= 1 features");
  if (feature_names_.size() != num_features()) throw InputError("feature name count does not match column count");
  std::unordered_set<std::string> seen;
  for (const auto& name : feature_names_) {
    if (!seen.insert(name).second) throw InputError("duplicate feature name '" + name + "'");
  }
  if (!features_.allFinite()) throw InputError("dataset features contain NaN or Inf");
  if (!target_.empty() && target_.size() != num_rows()) throw InputError("target length does not match row count");
  for (double y : target_) {
    if (!std::isfinite(y)) throw InputError("dataset target contains NaN or Inf");
    if (task_.is_classification() && (y != std::floor(y) || y < 1 || y > task_.num_classes)) {
      throw InputError("class index " + std::to_string(y) + " outside [1, " + std::to_string(task_.num_classes) + "]");
    }
  }
  if (task_.is_classification()) {
    if (class_labels_.empty()) {
      for (int c = 1; c <= task_.num_classes; ++c) class_labels_.push_back(std::to_string(c));
    }
    if (class_labels_.size() != static_cast<std::size_t>(task_.num_classes)) {
      throw InputError("class label count does not match class count");
    }
  } else if (!class_labels_.empty()) {
    throw InputError("regression dataset cannot carry class labels");
  }
}

std::size_t Dataset::feature_index(std::string_view name) const {
  for (std::size_t j = 0; j < feature_names_.size(); ++j) {
    if (feature_names_[j] == name) return j;
  }
  throw InputError("unknown feature '" + std::string(name) + "'; available: " + join_names(feature_names_));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  FeatureMatrix x(static_cast<Eigen::Index>(rows.size()), features_.cols());
  std::vector<double> y;
  if (has_targets()) y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= num_rows()) throw InputError("row index out of range in subset");
    x.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(rows[r]));
    if (has_targets()) y.push_back(target_[rows[r]]);
  }
  return Dataset(std::move(x), std::move(y), feature_names_, task_, class_labels_);
}

Dataset Dataset::with_features(FeatureMatrix features) const {
  if (features.rows() != features_.rows() || features.cols() != features_.cols()) {
    throw InputError("replacement feature matrix has a different shape");
  }
  return Dataset(std::move(features), target_, feature_names_, task_, class_labels_);
}

Dataset Dataset::without_targets() const { return Dataset(features_, {}, feature_names_, task_, class_labels_); }

Dataset parse_csv(std::string_view text, const CsvOptions& options) {
  const bool classification = options.kind == TaskKind::Kind::kClassification;
  std::vector<std::string_view> lines;
  std::vector<std::size_t> line_numbers;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = trim(text.substr(pos, end - pos));
    if (!line.empty() && line.front() != '#') {
      lines.push_back(line);
      line_numbers.push_back(line_no);
    }
    pos = end + 1;
  }
  if (lines.empty()) throw IngestError("empty file: no header row");

  const auto header = split_fields(lines.front());
  std::optional<std::size_t> target_col;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw IngestError("header column " + std::to_string(c + 1) + " is empty");
    if (header[c] == options.target_column) {
      target_col = c;
    } else {
      names.emplace_back(header[c]);
    }
  }
  if (!target_col && !options.target_optional) {
    throw IngestError("target column '" + options.target_column + "' not found in header");
  }
  if (names.empty()) throw IngestError("no feature columns besides the target");
  if (lines.size() < 2) throw IngestError("empty file: header but no data rows");

  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  FeatureMatrix x(n, static_cast<Eigen::Index>(names.size()));
  std::vector<double> y;
  std::vector<std::string> labels = options.class_labels;
  std::unordered_map<std::string, int> label_index;
  for (std::size_t c = 0; c < labels.size(); ++c) label_index.emplace(labels[c], static_cast<int>(c) + 1);

  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t src_line = line_numbers[static_cast<std::size_t>(i) + 1];
    const auto fields = split_fields(lines[static_cast<std::size_t>(i) + 1]);
    if (fields.size() != header.size()) {
      throw IngestError("line " + std::to_string(src_line) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string where = "line " + std::to_string(src_line) + ", column '" + std::string(header[c]) + "'";
      if (fields[c].empty()) throw IngestError(where + ": missing value");
      if (target_col && c == *target_col) {
        if (classification) {
          std::string label(fields[c]);
          auto it = label_index.find(label);
          if (it == label_index.end()) {
            if (!options.class_labels.empty()) throw IngestError(where + ": unknown class label '" + label + "'");
            labels.push_back(label);
            it = label_index.emplace(label, static_cast<int>(labels.size())).first;
          }
          y.push_back(it->second);
        } else {
          const auto value = parse_number(fields[c]);
          if (!value) throw IngestError(where + ": non-numeric value '" + std::string(fields[c]) + "'");
          y.push_back(*value);
        }
        continue;
      }
      const auto value = parse_number(fields[c]);
      if (!value) throw IngestError(where + ": non-numeric value '" + std::string(fields[c]) + "'");
      x(i, col++) = *value;
    }
  }

  TaskKind task = TaskKind::regression();
  if (classification) {
    if (labels.size() < 2) throw IngestError("classification target has fewer than 2 distinct labels");
    task = TaskKind::classification(static_cast<int>(labels.size()));
  } else {
    labels.clear();
  }
  try {
    return Dataset(std::move(x), std::move(y), std::move(names), task, std::move(labels));
  } catch (const InputError& e) {
    throw IngestError(e.what());
  }
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_csv(buffer.str(), options);
  } catch (const IngestError& e) {
    throw IngestError(path.filename().string() + ": " + e.what());
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string to_csv(const Dataset& ds, std::string_view target_column) {
  std::string out;
  for (std::size_t j = 0; j < ds.num_features(); ++j) {
    if (j) out += ',';
    out += ds.feature_names()[j];
  }
  if (ds.has_targets()) {
    out += ',';
    out += target_column;
  }
  out += '\n';
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    const auto row = ds.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    if (ds.has_targets()) {
      out += ',';
      const double y = ds.target()[i];
      out += ds.task().is_classification() ? ds.class_labels()[static_cast<std::size_t>(y) - 1] : format_double(y);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path, std::string_view target_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path.string() + "'");
  out << to_csv(ds, target_column);
}

std::size_t train_size(std::size_t n, double train_fraction) {
  return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
}

std::vector<std::size_t> split_order(std::size_t n, std::uint64_t seed) {
  CounterRng rng(derive_key(seed, "split", {n}));
  return random_permutation(n, rng);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  const std::size_t n = ds.num_rows();
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw InputError("train fraction must lie in (0, 1)");
  }
  const std::size_t n_train = train_size(n, spec.train_fraction);
  if (n_train < 1 || n_train >= n) {
    throw InputError("train fraction " + std::to_string(spec.train_fraction) + " leaves an empty part for n=" +
                     std::to_string(n));
  }
  const auto order = split_order(n, spec.seed);
  const std::span<const std::size_t> all(order);
  return {ds.subset(all.first(n_train)), ds.subset(all.subspan(n_train))};
}

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> sd) : mean_(std::move(mean)), sd_(std::move(sd)) {
  if (mean_.size() != sd_.size()) throw InputError("standardizer mean/sd length mismatch");
  for (double s : sd_) {
    if (!(s > 0.0)) throw InputError("standardizer sd must be > 0");
  }
}

Standardizer Standardizer::fit(const FeatureMatrix& train) {
  const auto n = static_cast<double>(train.rows());
  std::vector<double> mean(static_cast<std::size_t>(train.cols()));
  std::vector<double> sd(mean.size());
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    const auto col = train.col(j);
    if ((col.array() == col(0)).all()) {
      mean[j] = 0.0;
      sd[j] = 1.0;
      continue;
    }
    const double m = col.sum() / n;
    const double var = (col.array() - m).square().sum() / n;
    mean[j] = m;
    sd[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return Standardizer(std::move(mean), std::move(sd));
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != size()) throw InputError("standardizer width mismatch");
  FeatureMatrix z(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) z.col(j) = (x.col(j).array() - mean_[j]) / sd_[j];
  return z;
}

FeatureMatrix Standardizer::invert(const FeatureMatrix& z) const {
  if (static_cast<std::size_t>(z.cols()) != size()) throw InputError("standardizer width mismatch");
  FeatureMatrix x(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) x.col(j) = z.col(j).array() * sd_[j] + mean_[j];
  return x;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  if (x.size() != size()) throw InputError("standardizer width mismatch");
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean_[j]) / sd_[j];
  return z;
}

}  // namespace upfi
