// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "upfi/curves.hpp"
#include "upfi/error.hpp"
#include "upfi/forest.hpp"
#include "upfi/gaussian_process.hpp"
#include "upfi/importance.hpp"
#include "upfi/rng.hpp"
#include "upfi/serialization.hpp"
#include "upfi/svg.hpp"
#include "upfi/synthetic.hpp"

namespace upfi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error("usage", what) {}
};

class OutputError : public Error {
 public:
  OutputError(const std::string& kind, const std::string& what) : Error(kind, what) {}
};

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  bool force = false;
  unsigned threads = 1;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

json describe_input(const fs::path& path) {
  return json{{"file", path.filename().string()}, {"fnv1a64", hex64(fnv1a64(read_text(path)))}};
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

// Owns the output directory for one invocation: creates it, holds the
// advisory lock, and refuses to clobber files unless --force was given.
class OutputDir {
 public:
  OutputDir(const std::string& dir, bool force) : dir_(dir), force_(force) {
    if (dir.empty()) throw UsageError("--out is required");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw OutputError("io", "cannot create output directory '" + dir + "': " + ec.message());
    lock_ = dir_ / ".upfi.lock";
    std::FILE* f = std::fopen(lock_.c_str(), "wx");
    if (!f) {
      throw OutputError("locked", "output directory '" + dir + "' is in use by another run (remove " +
                                      lock_.string() + " if stale)");
    }
    std::fclose(f);
  }
  ~OutputDir() {
    std::error_code ec;
    fs::remove(lock_, ec);
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  void claim(const std::vector<std::string>& names) const {
    if (force_) return;
    for (const auto& n : names) {
      if (fs::exists(dir_ / n)) throw OutputError("exists", (dir_ / n).string() + " already exists; pass --force to overwrite");
    }
  }
  void write(const std::string& name, const std::string& text) const { write_text(dir_ / name, text); }
  void write_json(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }
  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
  fs::path lock_;
  bool force_;
};

class RunLog {
 public:
  void line(const std::string& key, const std::string& value) { text_ << key << ": " << value << '\n'; }
  void line(const std::string& key, double value) { line(key, format_double(value)); }
  template <class Fn>
  auto timed(const std::string& step, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto result = fn();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << elapsed.count() << " s";
    line("time_" + step, s.str());
    return result;
  }
  std::string str() const { return text_.str(); }

 private:
  std::ostringstream text_;
};

json base_config(const std::string& command, const Globals& g) {
  return json{{"command", command}, {"seed", g.seed}, {"threads", g.threads}, {"format_version", 1}};
}

std::optional<json> load_sidecar(const fs::path& csv) {
  fs::path side = csv;
  side.replace_extension(".json");
  if (!fs::exists(side)) return std::nullopt;
  try {
    json j = json::parse(read_text(side));
    if (j.is_object() && j.value("format", "") == "upfi-dataset") return j;
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

TaskKind::Kind parse_task_kind(const std::string& s) {
  if (s == "regression") return TaskKind::Kind::kRegression;
  if (s == "classification") return TaskKind::Kind::kClassification;
  throw UsageError("unknown task '" + s + "'; valid tasks: regression, classification");
}

bool parses_as_number(const std::string& s, double& value) {
  char* end = nullptr;
  value = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0' && std::isfinite(value);
}

// Loads test data in the layout a stored model expects.
Dataset load_for_model(const LoadedModel& m, const std::string& path, const std::string& target, bool need_target) {
  CsvOptions opt;
  opt.target_column = target;
  opt.kind = m.model->task().kind;
  opt.class_labels = m.class_labels;
  opt.target_optional = !need_target;
  Dataset ds = load_csv(path, opt);
  if (ds.feature_names() != m.feature_names) {
    std::string expected;
    for (const auto& n : m.feature_names) expected += (expected.empty() ? "" : ", ") + n;
    throw InputError("feature columns of '" + fs::path(path).filename().string() +
                     "' do not match the model; expected: " + expected);
  }
  return ds;
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string generator;
  std::optional<std::size_t> n;
  std::size_t d = 10;
  std::size_t relevant = 4;
  double eps = 0.1;
  std::string variant = "original";
  std::optional<double> noise_sd;
  double inner = 1.5;
  double outer = 2.5;
  std::optional<double> split;
};

int cmd_generate(const GenerateArgs& a, const Globals& g, std::ostream& out) {
  const std::uint64_t gen_seed = derive_key(g.seed, "generate");
  json cfg;
  Dataset ds = [&] {
    if (a.generator == "mease") {
      MeaseConfig c;
      if (a.n) c.n = *a.n;
      c.d = a.d;
      c.relevant = a.relevant;
      c.eps = a.eps;
      c.variant = parse_mease_variant(a.variant);
      c.seed = gen_seed;
      cfg = {{"n", c.n}, {"d", c.d}, {"relevant", c.relevant}, {"eps", c.eps}, {"variant", to_string(c.variant)}};
      return gen_mease(c);
    }
    if (a.generator == "corr-regression") {
      CorrRegressionConfig c;
      if (a.n) c.n = *a.n;
      if (a.noise_sd) c.noise_sd = *a.noise_sd;
      c.seed = gen_seed;
      cfg = {{"n", c.n}, {"noise_sd", c.noise_sd}};
      return gen_corr_regression(c);
    }
    BorderConfig c;
    if (a.n) c.n = *a.n;
    if (a.noise_sd) c.noise_sd = *a.noise_sd;
    c.inner = a.inner;
    c.outer = a.outer;
    c.seed = gen_seed;
    cfg = {{"n", c.n}, {"inner", c.inner}, {"outer", c.outer}, {"noise_sd", c.noise_sd}};
    return gen_border(c);
  }();

  json config = base_config("generate", g);
  config["generator"] = a.generator;
  config["generator_config"] = cfg;
  config["split"] = a.split ? json(*a.split) : json(nullptr);

  OutputDir dir(g.out, g.force);
  std::vector<std::string> names{"data.csv", "data.json", "generate.config.json"};
  if (a.split) names.insert(names.end(), {"train.csv", "train.json", "test.csv", "test.json"});
  dir.claim(names);

  auto emit = [&](const Dataset& part, const std::string& stem, const std::string& role) {
    std::string text = "# upfi dataset; generator: " + a.generator + "; role: " + role +
                       "; seed: " + std::to_string(g.seed) + "\n" + to_csv(part);
    dir.write(stem + ".csv", text);
    json side{{"format", "upfi-dataset"}, {"version", 1},          {"role", role},
              {"seed", g.seed},           {"generator", a.generator}, {"generator_config", cfg},
              {"dataset", dataset_metadata(part)}};
    dir.write_json(stem + ".json", side);
  };
  emit(ds, "data", "full");
  if (a.split) {
    auto [train, test] = split(ds, SplitSpec{*a.split, derive_key(g.seed, "split")});
    emit(train, "train", "train");
    emit(test, "test", "test");
    out << "wrote " << train.num_rows() << " train and " << test.num_rows() << " test rows\n";
  }
  dir.write_json("generate.config.json", config);
  out << "wrote " << ds.num_rows() << " rows x " << ds.num_features() << " features to " << dir.path("data.csv").string()
      << "\n";
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string model;
  std::string data;
  std::string target = "y";
  std::string labels;
  std::string task;
  int epochs = 1000;
  double lr = 0.1;
  bool no_standardize = false;
  int trees = 500;
  int max_depth = 8;
  double calib_fraction = 0.2;
  bool no_calibrate = false;
  std::string max_features = "sqrt";
};

Dataset load_training_data(const TrainArgs& a) {
  const TaskKind::Kind wanted = a.model == "gp" ? TaskKind::Kind::kRegression : TaskKind::Kind::kClassification;
  const auto sidecar = load_sidecar(a.data);
  std::optional<TaskKind::Kind> declared;
  if (!a.task.empty()) {
    declared = parse_task_kind(a.task);
  } else if (sidecar && sidecar->contains("dataset")) {
    declared = parse_task_kind(sidecar->at("dataset").at("task").at("kind").get<std::string>());
  }
  const std::string what = a.model == "gp" ? "gp is a regression model" : "rf is a classification model";
  if (declared && *declared != wanted) {
    throw InputError("task mismatch: " + what + " but the dataset is " +
                     (*declared == TaskKind::Kind::kRegression ? "regression" : "classification"));
  }
  CsvOptions opt;
  opt.target_column = a.target;
  opt.kind = wanted;
  if (!a.labels.empty()) {
    opt.class_labels = split_list(a.labels);
  } else if (sidecar && sidecar->at("dataset").contains("class_labels")) {
    opt.class_labels = sidecar->at("dataset").at("class_labels").get<std::vector<std::string>>();
  }
  Dataset ds = load_csv(a.data, opt);
  if (wanted == TaskKind::Kind::kClassification && !declared) {
    bool numeric = true, fractional = false;
    for (const auto& label : ds.class_labels()) {
      double v = 0.0;
      if (!parses_as_number(label, v)) {
        numeric = false;
        break;
      }
      fractional = fractional || v != std::floor(v);
    }
    if (numeric && fractional) {
      throw InputError("task mismatch: " + what + " but the target column holds non-integral numbers; pass --task to override");
    }
  }
  return ds;
}

int cmd_train(const TrainArgs& a, const Globals& g, std::ostream& out) {
  const std::uint64_t train_seed = derive_key(g.seed, "train");
  json config = base_config("train", g);
  config["model"] = a.model;
  config["data"] = describe_input(a.data);
  config["target"] = a.target;
  RunLog log;
  Dataset ds = log.timed("load", [&] { return load_training_data(a); });
  log.line("rows", std::to_string(ds.num_rows()));
  log.line("features", std::to_string(ds.num_features()));

  OutputDir dir(g.out, g.force);
  dir.claim({"model.json", "train.config.json", "train.log"});
  json doc;
  if (a.model == "gp") {
    if (a.epochs < 0) throw UsageError("--epochs must be >= 0");
    if (!(a.lr > 0.0)) throw UsageError("--lr must be positive");
    GpFitConfig c;
    c.epochs = a.epochs;
    c.learning_rate = a.lr;
    c.standardize_inputs = !a.no_standardize;
    c.seed = train_seed;
    config["gp"] = {{"epochs", c.epochs},
                    {"learning_rate", c.learning_rate},
                    {"standardize_inputs", c.standardize_inputs},
                    {"noise_floor", c.noise_floor},
                    {"optimizer", "adam"}};
    GpFitTrace trace;
    GaussianProcess gp = log.timed("fit", [&] { return GaussianProcess::fit(ds, c, &trace); });
    log.line("initial_log_marginal_likelihood", trace.initial_lml);
    log.line("final_log_marginal_likelihood", trace.final_lml);
    log.line("signal_variance", gp.signal_variance());
    log.line("lengthscale_standardized", gp.hyperparameters().lengthscale);
    log.line("noise_variance", gp.noise_variance());
    log.line("jitter", gp.jitter());
    doc = to_json(gp);
    out << "gp fitted: final log marginal likelihood " << format_double(trace.final_lml) << " nats\n";
  } else {
    ForestConfig c;
    c.n_trees = a.trees;
    c.max_depth = a.max_depth;
    c.calib_fraction = a.calib_fraction;
    c.calibrate = !a.no_calibrate;
    c.max_features = parse_max_features(a.max_features);
    c.seed = train_seed;
    c.threads = g.threads;
    config["rf"] = {{"n_trees", c.n_trees},
                    {"max_depth", c.max_depth},
                    {"calib_fraction", c.calib_fraction},
                    {"calibrate", c.calibrate},
                    {"max_features", to_string(c.max_features)}};
    CalibratedForest forest = log.timed("fit", [&] { return CalibratedForest::fit(ds, c); });
    for (std::size_t k = 0; k < forest.calibration().size(); ++k) {
      const auto& s = forest.calibration()[k];
      log.line("sigmoid_" + forest.class_labels()[k], "a=" + format_double(s.a) + " b=" + format_double(s.b));
    }
    doc = to_json(forest);
    out << "calibrated forest fitted: " << forest.trees().size() << " trees, " << forest.num_classes() << " classes\n";
  }
  doc["seed"] = g.seed;
  doc["training_data"] = dataset_metadata(ds);
  dir.write_json("model.json", doc);
  dir.write_json("train.config.json", config);
  dir.write("train.log", log.str());
  return 0;
}

// ---- pfi --------------------------------------------------------------------

struct PfiArgs {
  std::string model;
  std::string data;
  std::string target = "y";
  std::string measures = "likelihood,entropy";
  int repeats = 10;
  std::string classic_loss;
  std::string grouping = "exact";
  int bins = 4;
  bool no_svg = false;
};

std::string measure_axis(Measure m) {
  switch (m) {
    case Measure::kClassic: return "mean loss increase (loss units), bars +/- 2 SE";
    case Measure::kLikelihood: return "mean nll increase (nats), bars +/- 2 SE";
    default: return "mean entropy increase (nats), bars +/- 2 SE";
  }
}

int cmd_pfi(const PfiArgs& a, const Globals& g, std::ostream& out) {
  std::vector<Measure> measures;
  try {
    for (const auto& name : split_list(a.measures)) measures.push_back(parse_measure(name));
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  if (measures.empty()) throw UsageError("no measures given; valid measures: classic, likelihood, entropy, conditional_entropy");
  if (a.repeats < 1) throw UsageError("--repeats must be >= 1");
  PfiOptions options;
  if (a.grouping == "exact") {
    options.grouping = GroupingSpec::exact_match();
  } else if (a.grouping == "quantile") {
    options.grouping = GroupingSpec::quantile_bins(a.bins);
  } else {
    throw UsageError("unknown grouping '" + a.grouping + "'; valid groupings: exact, quantile");
  }

  RunLog log;
  const LoadedModel m = log.timed("load_model", [&] { return load_model(a.model); });
  bool need_target = false;
  for (Measure x : measures) need_target = need_target || x == Measure::kClassic || x == Measure::kLikelihood;
  const Dataset test = log.timed("load_data", [&] { return load_for_model(m, a.data, a.target, need_target); });
  options.classic_loss = default_loss(m.model->task());
  if (!a.classic_loss.empty()) {
    if (a.classic_loss == "squared_error_on_mean") {
      options.classic_loss = ClassicLoss::kSquaredErrorOnMean;
    } else if (a.classic_loss == "misclassification_on_argmax") {
      options.classic_loss = ClassicLoss::kMisclassificationOnArgmax;
    } else {
      throw UsageError("unknown classic loss '" + a.classic_loss +
                       "'; valid losses: squared_error_on_mean, misclassification_on_argmax");
    }
  }

  json config = base_config("pfi", g);
  config["model"] = describe_input(a.model);
  config["data"] = describe_input(a.data);
  config["target"] = a.target;
  std::vector<std::string> mnames;
  for (Measure x : measures) mnames.push_back(to_string(x));
  config["measures"] = mnames;
  config["repeats"] = a.repeats;
  config["classic_loss"] = to_string(options.classic_loss);
  config["grouping"] = {{"kind", a.grouping}, {"bins", a.bins}};

  OutputDir dir(g.out, g.force);
  std::vector<std::string> names{"importance.json", "importance.csv", "pfi.config.json", "pfi.log"};
  if (!a.no_svg) {
    for (const auto& n : mnames) names.push_back("importance_" + n + ".svg");
  }
  dir.claim(names);

  PermutationPlan plan{derive_key(g.seed, "pfi"), a.repeats, g.threads};
  const ImportanceReport report =
      log.timed("pfi", [&] { return pfi_all_features(*m.model, test, plan, measures, options); });
  log.line("rows", std::to_string(test.num_rows()));
  log.line("permutation_seed", std::to_string(plan.seed));

  ImportanceReport published = report;
  published.seed = g.seed;
  json doc = to_json(published);
  doc["permutation_seed"] = plan.seed;
  dir.write_json("importance.json", doc);
  dir.write("importance.csv", report_to_csv(published));
  if (!a.no_svg) {
    for (Measure x : measures) {
      std::vector<Bar> bars;
      for (const auto& e : report.entries) {
        if (e.measure == x) bars.push_back({e.feature_name, e.mean, 2.0 * e.standard_error()});
      }
      dir.write("importance_" + to_string(x) + ".svg", svg_bar_chart(to_string(x) + " PFI", measure_axis(x), bars));
    }
  }
  dir.write_json("pfi.config.json", config);
  dir.write("pfi.log", log.str());

  out << "measure,feature,mean,standard_error\n";
  for (const auto& e : report.entries) {
    out << to_string(e.measure) << ',' << e.feature_name << ',' << format_double(e.mean) << ','
        << format_double(e.standard_error()) << '\n';
    if (!e.warning.empty()) out << "warning: " << e.feature_name << ": " << e.warning << '\n';
  }
  return 0;
}

// ---- curves -----------------------------------------------------------------

struct CurvesArgs {
  std::string model;
  std::string data;
  std::string target = "y";
  std::string feature;
  std::string metric = "entropy";
  std::string grid = "linear";
  int points = 50;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  std::string cls;
  std::optional<std::size_t> max_curves;
  bool no_svg = false;
};

int cmd_curves(const CurvesArgs& a, const Globals& g, std::ostream& out) {
  CurveMetric metric;
  try {
    metric = parse_curve_metric(a.metric);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  RunLog log;
  const LoadedModel m = log.timed("load_model", [&] { return load_model(a.model); });
  const Dataset test =
      log.timed("load_data", [&] { return load_for_model(m, a.data, a.target, metric == CurveMetric::kNll); });
  const std::size_t j = test.feature_index(a.feature);

  GridSpec spec;
  if (a.grid == "linear") {
    spec.kind = GridSpec::Kind::kLinear;
    spec.min = a.grid_min;
    spec.max = a.grid_max;
  } else if (a.grid == "quantile") {
    spec.kind = GridSpec::Kind::kQuantile;
  } else {
    throw UsageError("unknown grid '" + a.grid + "'; valid grids: linear, quantile");
  }
  spec.points = a.points;
  const std::vector<double> grid = make_grid(test, j, spec);

  CurveOptions opt;
  opt.seed = derive_key(g.seed, "curves");
  opt.threads = g.threads;
  opt.max_curves = a.max_curves;
  if (m.model->task().is_classification()) {
    if (!a.cls.empty()) {
      auto it = std::find(m.class_labels.begin(), m.class_labels.end(), a.cls);
      if (it == m.class_labels.end()) {
        std::string valid;
        for (const auto& l : m.class_labels) valid += (valid.empty() ? "" : ", ") + l;
        throw InputError("unknown class '" + a.cls + "'; valid classes: " + valid);
      }
      opt.traced_class = static_cast<int>(it - m.class_labels.begin()) + 1;
    }
  }

  const std::string stem = sanitize(test.feature_names()[j]) + "_" + to_string(metric);
  json config = base_config("curves", g);
  config["model"] = describe_input(a.model);
  config["data"] = describe_input(a.data);
  config["feature"] = test.feature_names()[j];
  config["metric"] = to_string(metric);
  config["grid"] = {{"kind", a.grid}, {"points", a.points}};
  if (a.grid_min) config["grid"]["min"] = *a.grid_min;
  if (a.grid_max) config["grid"]["max"] = *a.grid_max;
  config["max_curves"] = a.max_curves ? json(*a.max_curves) : json(nullptr);
  if (m.model->task().is_classification()) config["traced_class"] = m.class_labels[opt.traced_class - 1];

  OutputDir dir(g.out, g.force);
  std::vector<std::string> names{"curves_" + stem + ".csv", "pdp_" + stem + ".csv", "ice_origin_" + stem + ".csv",
                                 "curves_" + stem + ".json", "curves_" + stem + ".config.json",
                                 "curves_" + stem + ".log"};
  if (!a.no_svg) names.push_back("curves_" + stem + ".svg");
  dir.claim(names);

  const CurveSet c = log.timed("curves", [&] { return compute_curves(*m.model, test, j, grid, metric, opt); });
  log.line("grid_points", std::to_string(grid.size()));
  log.line("retained_curves", std::to_string(c.ice_rows.size()));

  dir.write("curves_" + stem + ".csv", curves_to_csv(c, g.seed));
  dir.write("pdp_" + stem + ".csv", pdp_to_csv(c, g.seed));
  dir.write("ice_origin_" + stem + ".csv", ice_origin_to_csv(c, test.feature_names()));
  json doc = to_json(c);
  doc["seed"] = g.seed;
  dir.write_json("curves_" + stem + ".json", doc);
  if (!a.no_svg) {
    std::vector<Series> series;
    std::vector<Marker> markers;
    for (Eigen::Index r = 0; r < c.ice.rows(); ++r) {
      series.push_back({grid, std::vector<double>(c.ice.row(r).begin(), c.ice.row(r).end()), false});
      markers.push_back({c.origin_value[static_cast<std::size_t>(r)], c.origin_metric[static_cast<std::size_t>(r)]});
    }
    series.push_back({grid, c.pdp, true});
    dir.write("curves_" + stem + ".svg",
              svg_line_chart(to_string(metric) + " PDP and ICE", test.feature_names()[j],
                             to_string(metric) + " (" + metric_units(metric) + ")", series, markers));
  }
  dir.write_json("curves_" + stem + ".config.json", config);
  dir.write("curves_" + stem + ".log", log.str());
  out << "wrote " << c.ice_rows.size() << " ICE curves and the PDP over " << grid.size() << " grid points for "
      << c.feature_name << "\n";
  return 0;
}

// ---- feature-predictability -------------------------------------------------

struct PredictabilityArgs {
  std::string data;
  std::string target = "y";
  std::string task;
  bool include_target = false;
  double train_fraction = 0.75;
};

int cmd_feature_predictability(const PredictabilityArgs& a, const Globals& g, std::ostream& out) {
  CsvOptions opt;
  opt.target_column = a.target;
  opt.target_optional = !a.include_target;
  const auto sidecar = load_sidecar(a.data);
  if (!a.task.empty()) {
    opt.kind = parse_task_kind(a.task);
  } else if (sidecar && sidecar->contains("dataset")) {
    opt.kind = parse_task_kind(sidecar->at("dataset").at("task").at("kind").get<std::string>());
    if (sidecar->at("dataset").contains("class_labels")) {
      opt.class_labels = sidecar->at("dataset").at("class_labels").get<std::vector<std::string>>();
    }
  }
  RunLog log;
  const Dataset ds = log.timed("load", [&] { return load_csv(a.data, opt); });
  const std::size_t d = ds.num_features();
  const std::size_t predictors = d - 1 + (a.include_target ? 1 : 0);
  if (predictors == 0) throw InputError("feature predictability needs at least one predictor column");
  const std::size_t n = ds.num_rows();
  const std::size_t n_train = train_size(n, a.train_fraction);
  if (n_train == 0 || n_train >= n) throw InputError("train fraction leaves an empty train or test part");

  OutputDir dir(g.out, g.force);
  dir.claim({"predictability.csv", "predictability.json", "predictability.config.json", "predictability.log"});

  const std::uint64_t seed = derive_key(g.seed, "feature-predictability");
  const auto order = split_order(n, seed);
  std::vector<double> r2(d);
  log.timed("fit", [&] {
    for (std::size_t j = 0; j < d; ++j) {
      FeatureMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(predictors));
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = ds.row(order[i]);
        Eigen::Index c = 0;
        for (std::size_t k = 0; k < d; ++k) {
          if (k != j) x(static_cast<Eigen::Index>(i), c++) = row[k];
        }
        if (a.include_target) x(static_cast<Eigen::Index>(i), c) = ds.target()[order[i]];
        y[i] = row[j];
      }
      RegressionForestConfig rc;
      rc.seed = derive_key(seed, {j});
      rc.threads = g.threads;
      const FeatureMatrix xtr = x.topRows(static_cast<Eigen::Index>(n_train));
      const FeatureMatrix xte = x.bottomRows(static_cast<Eigen::Index>(n - n_train));
      const auto forest = RegressionForest::fit(xtr, std::span(y).first(n_train), rc);
      r2[j] = r_squared(std::span(y).subspan(n_train), forest.predict(xte));
    }
    return 0;
  });

  std::ostringstream csv;
  csv << "# upfi feature predictability; units: R^2 on held-out rows (unitless); seed: " << g.seed << "\n";
  csv << "feature,r_squared,include_target\n";
  json rows = json::array();
  for (std::size_t j = 0; j < d; ++j) {
    csv << ds.feature_names()[j] << ',' << format_double(r2[j]) << ',' << (a.include_target ? "true" : "false") << '\n';
    rows.push_back({{"feature", ds.feature_names()[j]}, {"r_squared", r2[j]}});
    out << ds.feature_names()[j] << ": R^2 = " << format_double(r2[j]) << '\n';
  }
  json config = base_config("feature-predictability", g);
  config["data"] = describe_input(a.data);
  config["include_target"] = a.include_target;
  config["train_fraction"] = a.train_fraction;
  config["forest"] = {{"n_trees", 100}, {"max_depth", "unlimited"}, {"max_features", "all"}};
  dir.write("predictability.csv", csv.str());
  dir.write_json("predictability.json", json{{"format", "upfi-predictability"},
                                              {"version", 1},
                                              {"seed", g.seed},
                                              {"units", "R^2 (unitless)"},
                                              {"include_target", a.include_target},
                                              {"features", rows}});
  dir.write_json("predictability.config.json", config);
  dir.write("predictability.log", log.str());
  return 0;
}

// ---- report -----------------------------------------------------------------

int cmd_report(const std::string& in, const Globals& g, std::ostream& out) {
  const fs::path src(in.empty() ? g.out : in);
  const fs::path importance = src / "importance.json";
  if (!fs::exists(importance)) throw InputError("no importance.json in '" + src.string() + "'");
  json doc;
  try {
    doc = json::parse(read_text(importance));
  } catch (const json::exception& e) {
    throw FormatError(std::string("importance.json: invalid JSON: ") + e.what());
  }
  const ImportanceReport report = report_from_json(doc);

  std::ostringstream md;
  md << "# Permutation feature importance\n\n";
  md << "Seed " << report.seed << ", " << report.n_repeats
     << " repeats. Values are mean increases over the unpermuted baseline in nats "
        "(classic PFI: loss units); SE is the sd over repeats divided by the square root of the repeat count.\n";
  for (Measure m : report.measures()) {
    md << "\n## " << to_string(m) << "\n\n| feature | mean | sd | SE | baseline |\n|---|---|---|---|---|\n";
    for (const auto& e : report.entries) {
      if (e.measure != m) continue;
      md << "| " << e.feature_name << " | " << format_double(e.mean) << " | " << format_double(e.sd) << " | "
         << format_double(e.standard_error()) << " | " << format_double(e.baseline) << " |\n";
    }
  }
  const fs::path pred = src / "predictability.json";
  if (fs::exists(pred)) {
    const json p = json::parse(read_text(pred));
    md << "\n## Feature predictability (held-out R^2"
       << (p.value("include_target", false) ? ", target included" : "") << ")\n\n| feature | R^2 |\n|---|---|\n";
    for (const auto& r : p.at("features")) {
      md << "| " << r.at("feature").get<std::string>() << " | " << format_double(r.at("r_squared").get<double>())
         << " |\n";
    }
  }
  OutputDir dir(g.out, g.force);
  dir.claim({"report.md"});
  dir.write("report.md", md.str());
  out << md.str();
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uncertainty-aware permutation feature importance and ICE/PDP curves"};
  app.name("upfi");
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--force", g.force, "Overwrite existing outputs");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  gen->add_option("generator", ga.generator, "mease | corr-regression | border")
      ->required()
      ->check(CLI::IsMember({"mease", "corr-regression", "border"}));
  gen->add_option("--n", ga.n, "Number of rows");
  gen->add_option("--d", ga.d, "Number of features (mease)");
  gen->add_option("--relevant", ga.relevant, "Number of relevant features (mease)");
  gen->add_option("--eps", ga.eps, "Label noise (mease)");
  gen->add_option("--variant", ga.variant, "original | copy-informative | copy-uninformative (mease)");
  gen->add_option("--noise-sd", ga.noise_sd, "Target noise standard deviation");
  gen->add_option("--inner", ga.inner, "Inner frame bound (border)");
  gen->add_option("--outer", ga.outer, "Outer frame bound (border)");
  gen->add_option("--split", ga.split, "Also write a seeded train/test split with this train fraction");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Fit a probabilistic model");
  train->add_option("model", ta.model, "gp | rf")->required()->check(CLI::IsMember({"gp", "rf"}));
  train->add_option("--data", ta.data, "Training CSV")->required();
  train->add_option("--target", ta.target, "Target column name");
  train->add_option("--labels", ta.labels, "Comma-separated class label order");
  train->add_option("--task", ta.task, "regression | classification (overrides the sidecar)");
  train->add_option("--epochs", ta.epochs, "GP optimizer epochs");
  train->add_option("--lr", ta.lr, "GP learning rate");
  train->add_flag("--no-standardize", ta.no_standardize, "Do not standardize GP inputs");
  train->add_option("--trees", ta.trees, "Forest size");
  train->add_option("--max-depth", ta.max_depth, "Tree depth limit (-1 = none)");
  train->add_option("--calib-fraction", ta.calib_fraction, "Rows held out for calibration");
  train->add_flag("--no-calibrate", ta.no_calibrate, "Skip sigmoid calibration");
  train->add_option("--max-features", ta.max_features, "sqrt | log2 | all");

  PfiArgs pa;
  auto* pfi = app.add_subcommand("pfi", "Permutation feature importance");
  pfi->add_option("--model", pa.model, "Model JSON")->required();
  pfi->add_option("--data", pa.data, "Test CSV")->required();
  pfi->add_option("--target", pa.target, "Target column name");
  pfi->add_option("--measures", pa.measures, "Comma-separated: classic, likelihood, entropy, conditional_entropy");
  pfi->add_option("--repeats", pa.repeats, "Permutations per feature");
  pfi->add_option("--classic-loss", pa.classic_loss, "squared_error_on_mean | misclassification_on_argmax");
  pfi->add_option("--grouping", pa.grouping, "exact | quantile (conditional entropy)");
  pfi->add_option("--bins", pa.bins, "Quantile bins per complementary feature");
  pfi->add_flag("--no-svg", pa.no_svg, "Skip bar charts");

  CurvesArgs ca;
  auto* curves = app.add_subcommand("curves", "ICE and PDP curves");
  curves->add_option("--model", ca.model, "Model JSON")->required();
  curves->add_option("--data", ca.data, "Test CSV")->required();
  curves->add_option("--target", ca.target, "Target column name");
  curves->add_option("--feature", ca.feature, "Feature name")->required();
  curves->add_option("--metric", ca.metric, "mean | entropy | nll");
  curves->add_option("--grid", ca.grid, "linear | quantile");
  curves->add_option("--points", ca.points, "Grid points");
  curves->add_option("--grid-min", ca.grid_min, "Linear grid start");
  curves->add_option("--grid-max", ca.grid_max, "Linear grid end");
  curves->add_option("--class", ca.cls, "Class label traced by the mean metric");
  curves->add_option("--max-curves", ca.max_curves, "Retain at most this many ICE curves");
  curves->add_flag("--no-svg", ca.no_svg, "Skip the plot");

  PredictabilityArgs fa;
  auto* pred = app.add_subcommand("feature-predictability", "Held-out R^2 of each feature given the others");
  pred->add_option("--data", fa.data, "Dataset CSV")->required();
  pred->add_option("--target", fa.target, "Target column name");
  pred->add_option("--task", fa.task, "regression | classification");
  pred->add_flag("--include-target", fa.include_target, "Use the target as an extra predictor");
  pred->add_option("--train-fraction", fa.train_fraction, "Fraction of rows used for fitting");

  std::string report_in;
  auto* report = app.add_subcommand("report", "Summarize an output directory as Markdown");
  report->add_option("--in", report_in, "Directory holding importance.json (default: --out)");

  for (auto* sub : {gen, train, pfi, curves, pred, report}) sub->fallthrough();

  std::vector<std::string> argv_store{"upfi"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (g.out.empty()) throw UsageError("--out is required");
    if (*gen) return cmd_generate(ga, g, out);
    if (*train) return cmd_train(ta, g, out);
    if (*pfi) return cmd_pfi(pa, g, out);
    if (*curves) return cmd_curves(ca, g, out);
    if (*pred) return cmd_feature_predictability(fa, g, out);
    return cmd_report(report_in, g, out);
  } catch (const UsageError& e) {
    err << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << "\n";
    return 1;
  }
}

}  // namespace upfi::cli
