// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/importance.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "upfi/error.hpp"
#include "upfi/parallel.hpp"
#include "upfi/rng.hpp"

namespace upfi {

std::string to_string(Measure m) {
  switch (m) {
    case Measure::kClassic:
      return "classic";
    case Measure::kLikelihood:
      return "likelihood";
    case Measure::kEntropy:
      return "entropy";
    case Measure::kConditionalEntropy:
      break;
  }
  return "conditional_entropy";
}

const std::vector<std::string>& measure_names() {
  static const std::vector<std::string> names = {"classic", "likelihood", "entropy", "conditional_entropy"};
  return names;
}

Measure parse_measure(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "classic") return Measure::kClassic;
  if (n == "likelihood") return Measure::kLikelihood;
  if (n == "entropy") return Measure::kEntropy;
  if (n == "conditional_entropy") return Measure::kConditionalEntropy;
  throw InputError("unknown measure '" + name + "'; valid measures: classic, likelihood, entropy, conditional_entropy");
}

std::string to_string(ClassicLoss loss) {
  return loss == ClassicLoss::kSquaredErrorOnMean ? "squared_error_on_mean" : "misclassification_on_argmax";
}

ClassicLoss default_loss(const TaskKind& task) {
  return task.is_regression() ? ClassicLoss::kSquaredErrorOnMean : ClassicLoss::kMisclassificationOnArgmax;
}

double ImportanceEntry::standard_error() const {
  return n_repeats > 0 ? sd / std::sqrt(static_cast<double>(n_repeats)) : 0.0;
}

const ImportanceEntry& ImportanceReport::get(Measure m, std::size_t feature) const {
  for (const auto& e : entries) {
    if (e.measure == m && e.feature == feature) return e;
  }
  throw InputError("report has no " + to_string(m) + " entry for feature " + std::to_string(feature));
}

std::vector<Measure> ImportanceReport::measures() const {
  std::vector<Measure> out;
  for (const auto& e : entries) {
    if (std::find(out.begin(), out.end(), e.measure) == out.end()) out.push_back(e.measure);
  }
  return out;
}

namespace {

bool needs_labels(Measure m) { return m == Measure::kClassic || m == Measure::kLikelihood; }

void check_inputs(const ProbabilisticModel& model, const Dataset& test, const std::vector<Measure>& measures,
                  ClassicLoss loss) {
  if (!(model.task() == test.task())) {
    throw InputError("model task " + model.task().to_string() + " does not match data task " + test.task().to_string());
  }
  if (model.num_features() != test.num_features()) {
    throw InputError("model expects " + std::to_string(model.num_features()) + " features, data has " +
                     std::to_string(test.num_features()));
  }
  if (test.num_rows() < 2) throw InputError("permutation importance needs at least 2 test rows");
  for (Measure m : measures) {
    if (needs_labels(m) && !test.has_targets()) throw InputError(to_string(m) + " importance needs target labels");
    if (m == Measure::kClassic) {
      const bool ok = test.task().is_regression() ? loss == ClassicLoss::kSquaredErrorOnMean
                                                   : loss == ClassicLoss::kMisclassificationOnArgmax;
      if (!ok) throw InputError("loss " + to_string(loss) + " does not apply to " + test.task().to_string());
    }
  }
}

void check_feature(const Dataset& test, std::size_t j) {
  if (j >= test.num_features()) {
    throw InputError("feature index " + std::to_string(j) + " out of range [0, " + std::to_string(test.num_features()) + ")");
  }
}

double pointwise(const PredictiveDistribution& dist, double y, Measure m, ClassicLoss loss) {
  switch (m) {
    case Measure::kLikelihood:
      return nll(dist, y);
    case Measure::kEntropy:
    case Measure::kConditionalEntropy:
      return entropy(dist);
    case Measure::kClassic:
      break;
  }
  if (loss == ClassicLoss::kSquaredErrorOnMean) {
    const double r = y - std::get<Gaussian>(dist).mean();
    return r * r;
  }
  return std::get<Categorical>(dist).argmax() == static_cast<int>(y) ? 0.0 : 1.0;
}

std::vector<double> row_stats(const std::vector<PredictiveDistribution>& preds, const Dataset& test, Measure m,
                              ClassicLoss loss) {
  std::vector<double> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out[i] = pointwise(preds[i], test.has_targets() ? test.target()[i] : 0.0, m, loss);
  }
  return out;
}

FeatureMatrix permute_column(const FeatureMatrix& x, std::size_t j, std::span<const std::size_t> perm) {
  FeatureMatrix out = x;
  const auto col = static_cast<Eigen::Index>(j);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out(static_cast<Eigen::Index>(i), col) = x(static_cast<Eigen::Index>(perm[i]), col);
  }
  return out;
}

double mean_delta(const std::vector<double>& permuted, const std::vector<double>& base) {
  double total = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) total += permuted[i] - base[i];
  return total / static_cast<double>(base.size());
}

double mean_of(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

void summarize(ImportanceEntry& e) {
  e.n_repeats = static_cast<int>(e.repeats.size());
  e.mean = mean_of(e.repeats);
  if (e.repeats.size() < 2) {
    e.sd = 0.0;
    return;
  }
  double ss = 0.0;
  for (double v : e.repeats) ss += (v - e.mean) * (v - e.mean);
  e.sd = std::sqrt(ss / static_cast<double>(e.repeats.size() - 1));
}

std::uint64_t conditional_key(const PermutationPlan& plan, std::size_t j, int r) {
  return derive_key(plan.seed, "conditional-permutation", {j, static_cast<std::uint64_t>(r)});
}

bool all_singletons(std::span<const std::size_t> groups) {
  std::vector<std::size_t> sizes;
  for (std::size_t g : groups) {
    if (g >= sizes.size()) sizes.resize(g + 1, 0);
    if (++sizes[g] > 1) return false;
  }
  return true;
}

// Shared driver: `features` x `measures` entries, one permuted prediction
// pass per (feature, repeat) for marginal measures and a separate grouped
// pass for the conditional measure.
ImportanceReport run(const ProbabilisticModel& model, const Dataset& test, std::span<const std::size_t> features,
                     const PermutationPlan& plan, const std::vector<Measure>& measures, const PfiOptions& options) {
  if (plan.n_repeats < 1) throw InputError("n_repeats must be >= 1");
  if (measures.empty()) throw InputError("no importance measures requested");
  check_inputs(model, test, measures, options.classic_loss);
  for (std::size_t j : features) check_feature(test, j);

  const std::size_t n = test.num_rows();
  const auto base_preds = model.predict_batch(test.features());
  std::vector<std::vector<double>> base_stats;
  for (Measure m : measures) base_stats.push_back(row_stats(base_preds, test, m, options.classic_loss));

  std::vector<std::size_t> marginal, conditional;
  for (std::size_t k = 0; k < measures.size(); ++k) {
    (measures[k] == Measure::kConditionalEntropy ? conditional : marginal).push_back(k);
  }

  const std::size_t reps = static_cast<std::size_t>(plan.n_repeats);
  const std::size_t units = features.size() * reps;
  // values[unit][measure]
  std::vector<std::vector<double>> values(units, std::vector<double>(measures.size(), 0.0));
  std::vector<std::vector<std::size_t>> groups(features.size());
  if (!conditional.empty()) {
    for (std::size_t f = 0; f < features.size(); ++f) groups[f] = group_rows(test.features(), features[f], options.grouping);
  }

  parallel_for(units, plan.threads, [&](std::size_t unit) {
    const std::size_t f = unit / reps;
    const int r = static_cast<int>(unit % reps);
    const std::size_t j = features[f];
    if (!marginal.empty()) {
      const auto perm = plan_permutation(plan, j, r, n);
      const auto preds = model.predict_batch(permute_column(test.features(), j, perm));
      for (std::size_t k : marginal) {
        values[unit][k] = mean_delta(row_stats(preds, test, measures[k], options.classic_loss), base_stats[k]);
      }
    }
    if (!conditional.empty()) {
      const auto perm = grouped_permutation(groups[f], conditional_key(plan, j, r));
      const auto preds = model.predict_batch(permute_column(test.features(), j, perm));
      const auto stats = row_stats(preds, test, Measure::kEntropy, options.classic_loss);
      for (std::size_t k : conditional) values[unit][k] = mean_delta(stats, base_stats[k]);
    }
  });

  ImportanceReport report;
  report.seed = plan.seed;
  report.n_repeats = plan.n_repeats;
  report.classic_loss = options.classic_loss;
  for (std::size_t k = 0; k < measures.size(); ++k) {
    for (std::size_t f = 0; f < features.size(); ++f) {
      ImportanceEntry e;
      e.feature = features[f];
      e.feature_name = test.feature_names()[features[f]];
      e.measure = measures[k];
      e.baseline = mean_of(base_stats[k]);
      for (std::size_t r = 0; r < reps; ++r) e.repeats.push_back(values[f * reps + r][k]);
      summarize(e);
      if (measures[k] == Measure::kConditionalEntropy && all_singletons(groups[f])) {
        e.warning = "grouping produced only singleton groups; conditional permutation is a no-op";
      }
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

ImportanceEntry single(const ProbabilisticModel& model, const Dataset& test, std::size_t j, const PermutationPlan& plan,
                       Measure m, const PfiOptions& options) {
  const std::size_t features[] = {j};
  check_feature(test, j);
  return run(model, test, features, plan, {m}, options).entries.front();
}

}  // namespace

std::vector<std::size_t> plan_permutation(const PermutationPlan& plan, std::size_t j, int repeat, std::size_t n) {
  CounterRng rng(derive_key(plan.seed, "permutation", {j, static_cast<std::uint64_t>(repeat)}));
  return random_permutation(n, rng);
}

std::vector<std::size_t> group_rows(const FeatureMatrix& x, std::size_t j, const GroupingSpec& grouping) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  if (j >= d) throw InputError("feature index out of range for grouping");
  std::vector<std::vector<double>> keys(n);

  if (grouping.kind == GroupingSpec::Kind::kExactMatch) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t m = 0; m < d; ++m) {
        if (m != j) keys[i].push_back(x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)));
      }
    }
  } else {
    if (grouping.bins < 1) throw InputError("quantile grouping needs at least 1 bin");
    // Cap bins so the expected number of cells stays at or below n / 2.
    int bins = grouping.bins;
    if (d > 1) {
      const double cap = std::pow(static_cast<double>(n) / 2.0, 1.0 / static_cast<double>(d - 1));
      bins = std::max(1, std::min(bins, static_cast<int>(std::floor(cap))));
    }
    for (std::size_t m = 0; m < d; ++m) {
      if (m == j) continue;
      std::vector<double> sorted(n);
      for (std::size_t i = 0; i < n; ++i) sorted[i] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
      std::sort(sorted.begin(), sorted.end());
      std::vector<double> edges;
      for (int b = 1; b < bins; ++b) {
        const auto pos = static_cast<std::size_t>(std::floor(static_cast<double>(b) / bins * static_cast<double>(n - 1)));
        if (edges.empty() || sorted[pos] > edges.back()) edges.push_back(sorted[pos]);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double v = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
        keys[i].push_back(static_cast<double>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin()));
      }
    }
  }

  std::map<std::vector<double>, std::size_t> ids;
  std::vector<std::size_t> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[i] = ids.emplace(keys[i], ids.size()).first->second;
  return groups;
}

std::vector<std::size_t> grouped_permutation(std::span<const std::size_t> groups, std::uint64_t key) {
  const std::size_t n = groups.size();
  std::size_t n_groups = 0;
  for (std::size_t g : groups) n_groups = std::max(n_groups, g + 1);
  std::vector<std::vector<std::size_t>> members(n_groups);
  for (std::size_t i = 0; i < n; ++i) members[groups[i]].push_back(i);
  std::vector<std::size_t> perm(n);
  for (std::size_t g = 0; g < n_groups; ++g) {
    CounterRng rng(derive_key(key, {g}));
    std::vector<std::size_t> source = members[g];
    shuffle(source, rng);
    for (std::size_t k = 0; k < members[g].size(); ++k) perm[members[g][k]] = source[k];
  }
  return perm;
}

double permuted_delta(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                      std::span<const std::size_t> perm, Measure measure, ClassicLoss loss) {
  check_inputs(model, test, {measure}, loss);
  check_feature(test, j);
  if (perm.size() != test.num_rows()) throw InputError("permutation length does not match row count");
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t p : perm) {
    if (p >= perm.size() || seen[p]) throw InputError("not a permutation");
    seen[p] = true;
  }
  const auto base = row_stats(model.predict_batch(test.features()), test, measure, loss);
  const auto permuted = row_stats(model.predict_batch(permute_column(test.features(), j, perm)), test, measure, loss);
  return mean_delta(permuted, base);
}

ImportanceEntry likelihood_pfi(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                               const PermutationPlan& plan) {
  return single(model, test, j, plan, Measure::kLikelihood, {});
}

ImportanceEntry entropy_pfi(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                            const PermutationPlan& plan) {
  return single(model, test, j, plan, Measure::kEntropy, {});
}

ImportanceEntry classic_pfi(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                            const PermutationPlan& plan, ClassicLoss loss) {
  return single(model, test, j, plan, Measure::kClassic, PfiOptions{.classic_loss = loss});
}

ImportanceEntry conditional_entropy_pfi(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                                        const PermutationPlan& plan, const GroupingSpec& grouping) {
  return single(model, test, j, plan, Measure::kConditionalEntropy, PfiOptions{.grouping = grouping});
}

ImportanceReport pfi_all_features(const ProbabilisticModel& model, const Dataset& test, const PermutationPlan& plan,
                                  const std::vector<Measure>& measures, const PfiOptions& options) {
  std::vector<Measure> unique;
  for (Measure m : measures) {
    if (std::find(unique.begin(), unique.end(), m) == unique.end()) unique.push_back(m);
  }
  std::vector<std::size_t> features(test.num_features());
  for (std::size_t j = 0; j < features.size(); ++j) features[j] = j;
  return run(model, test, features, plan, unique, options);
}

}  // namespace upfi
