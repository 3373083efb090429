// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/serialization.hpp"

#include <fstream>
#include <sstream>

#include "upfi/error.hpp"

namespace upfi {

using nlohmann::json;

namespace {

json task_json(const TaskKind& task) {
  json j;
  j["kind"] = task.is_regression() ? "regression" : "classification";
  if (task.is_classification()) j["num_classes"] = task.num_classes;
  return j;
}

json matrix_json(const FeatureMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return rows;
}

FeatureMatrix matrix_from_json(const json& rows, std::size_t width) {
  FeatureMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = rows.at(i).get<std::vector<double>>();
    if (row.size() != width) throw FormatError("matrix row " + std::to_string(i) + " has wrong width");
    for (std::size_t j = 0; j < width; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

json header(const std::string& type) {
  return json{{"format", "upfi-model"}, {"version", kModelFormatVersion}, {"type", type}};
}

json tree_json(const DecisionTree& tree) {
  std::vector<int> feature, left, right, leaf;
  std::vector<double> threshold;
  for (const auto& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    leaf.push_back(n.leaf);
  }
  return json{{"depth", tree.depth}, {"feature", feature}, {"threshold", threshold}, {"left", left},
              {"right", right},      {"leaf", leaf},       {"leaf_values", tree.leaf_values}};
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree tree;
  tree.depth = j.at("depth").get<int>();
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto leaf = j.at("leaf").get<std::vector<int>>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || leaf.size() != n || n == 0) {
    throw FormatError("tree arrays disagree in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0 && (left[i] <= 0 || right[i] <= 0 || left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n))) {
      throw FormatError("tree node " + std::to_string(i) + " has invalid children");
    }
    tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], leaf[i]});
  }
  tree.leaf_values = j.at("leaf_values").get<std::vector<double>>();
  return tree;
}

}  // namespace

json dataset_metadata(const Dataset& ds) {
  json j{{"n", ds.num_rows()}, {"d", ds.num_features()}, {"feature_names", ds.feature_names()}, {"task", task_json(ds.task())}};
  if (ds.task().is_classification()) j["class_labels"] = ds.class_labels();
  return j;
}

json to_json(const GaussianProcess& gp) {
  json j = header("gp");
  j["task"] = task_json(gp.task());
  j["feature_names"] = gp.feature_names();
  j["kernel"] = "rbf_scale";
  j["lengthscale_kind"] = "isotropic";
  const auto& h = gp.hyperparameters();
  j["hyperparameters"] = {{"signal_variance", h.signal_variance},
                          {"lengthscale", h.lengthscale},
                          {"noise_variance", h.noise_variance},
                          {"mean", h.mean},
                          {"units", "standardized"}};
  j["standardize_inputs"] = gp.standardize_inputs();
  if (gp.standardize_inputs()) j["input_standardizer"] = {{"mean", gp.input_scaler().mean()}, {"sd", gp.input_scaler().sd()}};
  j["target_standardizer"] = {{"mean", gp.target_mean()}, {"sd", gp.target_sd()}};
  j["jitter"] = gp.jitter();
  j["log_marginal_likelihood"] = gp.log_marginal_likelihood();
  j["train"] = {{"x", matrix_json(gp.train_x())}, {"y", gp.train_y()}};
  return j;
}

json to_json(const CalibratedForest& forest) {
  json j = header("calibrated_forest");
  j["task"] = task_json(forest.task());
  j["feature_names"] = forest.feature_names();
  j["class_labels"] = forest.class_labels();
  json calib = json::array();
  for (const auto& s : forest.calibration()) calib.push_back({{"a", s.a}, {"b", s.b}});
  j["calibration"] = calib;
  json trees = json::array();
  for (const auto& t : forest.trees()) trees.push_back(tree_json(t));
  j["trees"] = trees;
  return j;
}

LoadedModel model_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "upfi-model") throw FormatError("not a upfi model document");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) throw FormatError("unsupported model format version " + std::to_string(version));
    LoadedModel out;
    out.type = doc.at("type").get<std::string>();
    out.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    if (out.type == "gp") {
      const auto& h = doc.at("hyperparameters");
      GpHyperparameters hyper{h.at("signal_variance").get<double>(), h.at("lengthscale").get<double>(),
                              h.at("noise_variance").get<double>(), h.at("mean").get<double>()};
      const bool standardize = doc.at("standardize_inputs").get<bool>();
      Standardizer scaler;
      if (standardize) {
        scaler = Standardizer(doc.at("input_standardizer").at("mean").get<std::vector<double>>(),
                              doc.at("input_standardizer").at("sd").get<std::vector<double>>());
      }
      auto gp = GaussianProcess::from_parts(matrix_from_json(doc.at("train").at("x"), out.feature_names.size()),
                                            doc.at("train").at("y").get<std::vector<double>>(), out.feature_names,
                                            hyper, standardize, std::move(scaler),
                                            doc.at("target_standardizer").at("mean").get<double>(),
                                            doc.at("target_standardizer").at("sd").get<double>());
      out.model = std::make_shared<GaussianProcess>(std::move(gp));
      return out;
    }
    if (out.type == "calibrated_forest") {
      out.class_labels = doc.at("class_labels").get<std::vector<std::string>>();
      std::vector<DecisionTree> trees;
      for (const auto& t : doc.at("trees")) trees.push_back(tree_from_json(t));
      std::vector<SigmoidCalibration> calib;
      for (const auto& s : doc.at("calibration")) calib.push_back({s.at("a").get<double>(), s.at("b").get<double>()});
      const int k = doc.at("task").at("num_classes").get<int>();
      for (const auto& t : trees) {
        for (const auto& n : t.nodes) {
          if (n.feature >= static_cast<int>(out.feature_names.size())) throw FormatError("tree splits on unknown feature");
          if (n.feature < 0 && (n.leaf < 0 || static_cast<std::size_t>(n.leaf + 1) * static_cast<std::size_t>(k) > t.leaf_values.size())) {
            throw FormatError("tree leaf index out of range");
          }
        }
      }
      out.model = std::make_shared<CalibratedForest>(std::move(trees), std::move(calib), k, out.feature_names,
                                                     out.class_labels);
      return out;
    }
    throw FormatError("unknown model type '" + out.type + "'");
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model document: ") + e.what());
  } catch (const InputError& e) {
    throw FormatError(std::string("inconsistent model document: ") + e.what());
  }
}

LoadedModel load_model(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.filename().string() + ": invalid JSON: " + e.what());
  }
  return model_from_json(doc);
}

json to_json(const ImportanceReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    json je{{"feature", e.feature},   {"feature_name", e.feature_name},     {"measure", to_string(e.measure)},
            {"mean", e.mean},         {"sd", e.sd},                         {"standard_error", e.standard_error()},
            {"n_repeats", e.n_repeats}, {"baseline", e.baseline},           {"repeats", e.repeats}};
    if (!e.warning.empty()) je["warning"] = e.warning;
    entries.push_back(je);
  }
  return json{{"format", "upfi-importance"},
              {"version", kReportFormatVersion},
              {"units", "nats (classic: loss units)"},
              {"seed", report.seed},
              {"n_repeats", report.n_repeats},
              {"classic_loss", to_string(report.classic_loss)},
              {"sign_convention", "permuted minus baseline"},
              {"entries", entries}};
}

ImportanceReport report_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "upfi-importance") throw FormatError("not a upfi importance report");
    ImportanceReport report;
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.n_repeats = doc.at("n_repeats").get<int>();
    report.classic_loss = doc.at("classic_loss").get<std::string>() == "squared_error_on_mean"
                              ? ClassicLoss::kSquaredErrorOnMean
                              : ClassicLoss::kMisclassificationOnArgmax;
    for (const auto& je : doc.at("entries")) {
      ImportanceEntry e;
      e.feature = je.at("feature").get<std::size_t>();
      e.feature_name = je.at("feature_name").get<std::string>();
      e.measure = parse_measure(je.at("measure").get<std::string>());
      e.mean = je.at("mean").get<double>();
      e.sd = je.at("sd").get<double>();
      e.n_repeats = je.at("n_repeats").get<int>();
      e.baseline = je.at("baseline").get<double>();
      e.repeats = je.at("repeats").get<std::vector<double>>();
      if (je.contains("warning")) e.warning = je.at("warning").get<std::string>();
      report.entries.push_back(std::move(e));
    }
    return report;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed importance report: ") + e.what());
  }
}

std::string report_to_csv(const ImportanceReport& report) {
  std::ostringstream out;
  out << "# upfi importance; units: nats (classic: loss units); seed: " << report.seed << "\n";
  out << "feature,measure,repeat,value\n";
  for (const auto& e : report.entries) {
    for (std::size_t r = 0; r < e.repeats.size(); ++r) {
      out << e.feature_name << ',' << to_string(e.measure) << ',' << r + 1 << ',' << format_double(e.repeats[r]) << '\n';
    }
  }
  return out.str();
}

std::string metric_units(CurveMetric metric) {
  return metric == CurveMetric::kMean ? "target units (class probability for classifiers)" : "nats";
}

json to_json(const CurveSet& c) {
  json ice = json::array();
  for (Eigen::Index i = 0; i < c.ice.rows(); ++i) ice.push_back(std::vector<double>(c.ice.row(i).begin(), c.ice.row(i).end()));
  return json{{"format", "upfi-curves"},
              {"version", kReportFormatVersion},
              {"feature", c.feature},
              {"feature_name", c.feature_name},
              {"metric", to_string(c.metric)},
              {"units", metric_units(c.metric)},
              {"traced_class", c.traced_class},
              {"grid", c.grid},
              {"pdp", c.pdp},
              {"ice_rows", c.ice_rows},
              {"ice", ice},
              {"origin_value", c.origin_value},
              {"origin_metric", c.origin_metric},
              {"context", matrix_json(c.context)}};
}

CurveSet curves_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "upfi-curves") throw FormatError("not a upfi curves document");
    CurveSet c;
    c.feature = doc.at("feature").get<std::size_t>();
    c.feature_name = doc.at("feature_name").get<std::string>();
    c.metric = parse_curve_metric(doc.at("metric").get<std::string>());
    c.traced_class = doc.at("traced_class").get<int>();
    c.grid = doc.at("grid").get<std::vector<double>>();
    c.pdp = doc.at("pdp").get<std::vector<double>>();
    c.ice_rows = doc.at("ice_rows").get<std::vector<std::size_t>>();
    c.origin_value = doc.at("origin_value").get<std::vector<double>>();
    c.origin_metric = doc.at("origin_metric").get<std::vector<double>>();
    const auto& ice = doc.at("ice");
    c.ice.resize(static_cast<Eigen::Index>(ice.size()), static_cast<Eigen::Index>(c.grid.size()));
    for (std::size_t i = 0; i < ice.size(); ++i) {
      const auto row = ice.at(i).get<std::vector<double>>();
      if (row.size() != c.grid.size()) throw FormatError("ICE row has wrong length");
      for (std::size_t t = 0; t < row.size(); ++t) c.ice(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = row[t];
    }
    const auto& ctx = doc.at("context");
    const std::size_t width = ctx.empty() ? 0 : ctx.at(0).size();
    c.context = matrix_from_json(ctx, width);
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed curves document: ") + e.what());
  }
}

std::string curves_to_csv(const CurveSet& c, std::uint64_t seed) {
  std::ostringstream out;
  out << "# upfi curves; feature: " << c.feature_name << "; metric: " << to_string(c.metric)
      << "; units: " << metric_units(c.metric) << "; seed: " << seed << "\n";
  out << "example_id,grid_value,metric_value\n";
  for (Eigen::Index r = 0; r < c.ice.rows(); ++r) {
    for (std::size_t t = 0; t < c.grid.size(); ++t) {
      out << c.ice_rows[static_cast<std::size_t>(r)] << ',' << format_double(c.grid[t]) << ','
          << format_double(c.ice(r, static_cast<Eigen::Index>(t))) << '\n';
    }
  }
  for (std::size_t t = 0; t < c.grid.size(); ++t) {
    out << "pdp," << format_double(c.grid[t]) << ',' << format_double(c.pdp[t]) << '\n';
  }
  return out.str();
}

std::string pdp_to_csv(const CurveSet& c, std::uint64_t seed) {
  std::ostringstream out;
  out << "# upfi pdp; feature: " << c.feature_name << "; metric: " << to_string(c.metric)
      << "; units: " << metric_units(c.metric) << "; seed: " << seed << "\n";
  out << "grid_value,pdp_value\n";
  for (std::size_t t = 0; t < c.grid.size(); ++t) out << format_double(c.grid[t]) << ',' << format_double(c.pdp[t]) << '\n';
  return out.str();
}

std::string ice_origin_to_csv(const CurveSet& c, const std::vector<std::string>& feature_names) {
  std::ostringstream out;
  out << "example_id,feature_value,metric_value";
  for (const auto& name : feature_names) out << ",x_" << name;
  out << '\n';
  for (std::size_t r = 0; r < c.ice_rows.size(); ++r) {
    out << c.ice_rows[r] << ',' << format_double(c.origin_value[r]) << ',' << format_double(c.origin_metric[r]);
    for (Eigen::Index j = 0; j < c.context.cols(); ++j) out << ',' << format_double(c.context(static_cast<Eigen::Index>(r), j));
    out << '\n';
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IngestError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace upfi
