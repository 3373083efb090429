// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "upfi/curves.hpp"
#include "upfi/dataset.hpp"
#include "upfi/forest.hpp"
#include "upfi/gaussian_process.hpp"
#include "upfi/importance.hpp"

namespace upfi {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

/// Names, task and label map of a dataset.
nlohmann::json dataset_metadata(const Dataset& ds);

/// Versioned model documents. The GP document stores its training data and
/// input standardizer so that loading rebuilds the identical posterior.
nlohmann::json to_json(const GaussianProcess& gp);
nlohmann::json to_json(const CalibratedForest& forest);

struct LoadedModel {
  std::shared_ptr<const ProbabilisticModel> model;
  std::string type;  // "gp" or "calibrated_forest"
  std::vector<std::string> feature_names;
  std::vector<std::string> class_labels;
};

/// Throws FormatError for unknown formats/versions or malformed documents.
LoadedModel model_from_json(const nlohmann::json& doc);
LoadedModel load_model(const std::filesystem::path& path);

nlohmann::json to_json(const ImportanceReport& report);
ImportanceReport report_from_json(const nlohmann::json& doc);

/// Tidy rows (feature, measure, repeat, value) after a '#' line naming units and seed.
std::string report_to_csv(const ImportanceReport& report);

nlohmann::json to_json(const CurveSet& curves);
CurveSet curves_from_json(const nlohmann::json& doc);

/// Tidy rows (example_id, grid_value, metric_value): ICE rows first, then PDP
/// rows with example_id "pdp".
std::string curves_to_csv(const CurveSet& curves, std::uint64_t seed);
std::string pdp_to_csv(const CurveSet& curves, std::uint64_t seed);
/// One row per retained curve: example id, original feature value, original
/// metric value and the full feature row.
std::string ice_origin_to_csv(const CurveSet& curves, const std::vector<std::string>& feature_names);

std::string metric_units(CurveMetric metric);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace upfi
