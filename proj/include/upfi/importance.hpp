// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "upfi/dataset.hpp"
#include "upfi/model.hpp"

namespace upfi {

enum class Measure { kClassic, kLikelihood, kEntropy, kConditionalEntropy };

std::string to_string(Measure m);
/// Accepts classic, likelihood, entropy, conditional_entropy (also with '-').
Measure parse_measure(const std::string& name);
const std::vector<std::string>& measure_names();

enum class ClassicLoss { kSquaredErrorOnMean, kMisclassificationOnArgmax };
std::string to_string(ClassicLoss loss);
ClassicLoss default_loss(const TaskKind& task);

/// Seed and repeat count for the permutation draws. Repeat r of feature j
/// uses a stream keyed by (seed, j, r), so results do not depend on the order
/// or the number of workers evaluating them.
struct PermutationPlan {
  std::uint64_t seed = 0;
  int n_repeats = 10;
  unsigned threads = 1;
};

/// How conditional permutations group the test rows.
struct GroupingSpec {
  enum class Kind { kExactMatch, kQuantileBins };
  Kind kind = Kind::kExactMatch;
  int bins = 4;  // per complementary feature, quantile grouping only

  static GroupingSpec exact_match() { return {}; }
  static GroupingSpec quantile_bins(int bins) { return {Kind::kQuantileBins, bins}; }
};

struct ImportanceEntry {
  std::size_t feature = 0;
  std::string feature_name;
  Measure measure = Measure::kLikelihood;
  double mean = 0.0;
  double sd = 0.0;       // sample sd over repeats (0 when n_repeats == 1)
  int n_repeats = 0;
  double baseline = 0.0;  // mean unpermuted loss / nll / entropy
  std::vector<double> repeats;
  std::string warning;

  double standard_error() const;
};

/// One entry per (measure, feature) in the order measures x features.
struct ImportanceReport {
  std::vector<ImportanceEntry> entries;
  std::uint64_t seed = 0;
  int n_repeats = 0;
  ClassicLoss classic_loss = ClassicLoss::kSquaredErrorOnMean;

  const ImportanceEntry& get(Measure m, std::size_t feature) const;
  std::vector<Measure> measures() const;
};

struct PfiOptions {
  ClassicLoss classic_loss = ClassicLoss::kSquaredErrorOnMean;
  GroupingSpec grouping{};
};

ImportanceEntry likelihood_pfi(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                               const PermutationPlan& plan);
ImportanceEntry entropy_pfi(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                            const PermutationPlan& plan);
ImportanceEntry classic_pfi(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                            const PermutationPlan& plan, ClassicLoss loss);
/// Entropy-PFI with permutations confined to groups of rows that share their
/// complementary features (exact match or quantile cells).
ImportanceEntry conditional_entropy_pfi(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                                        const PermutationPlan& plan, const GroupingSpec& grouping);

/// Every requested measure on every feature. Non-conditional measures for
/// the same (feature, repeat) are evaluated on one shared permuted matrix.
ImportanceReport pfi_all_features(const ProbabilisticModel& model, const Dataset& test, const PermutationPlan& plan,
                                  const std::vector<Measure>& measures, const PfiOptions& options);

/// Mean over rows of stat(x with column j replaced by column j[perm]) - stat(x).
/// perm[i] is the source row for row i. For kConditionalEntropy this is the
/// entropy difference (the caller supplies the grouped permutation).
double permuted_delta(const ProbabilisticModel& model, const Dataset& test, std::size_t j,
                      std::span<const std::size_t> perm, Measure measure,
                      ClassicLoss loss = ClassicLoss::kSquaredErrorOnMean);

/// The permutation used for (feature j, repeat r).
std::vector<std::size_t> plan_permutation(const PermutationPlan& plan, std::size_t j, int repeat, std::size_t n);

/// Group id per row for conditional permutation of feature j; ids are
/// assigned in order of first appearance.
std::vector<std::size_t> group_rows(const FeatureMatrix& x, std::size_t j, const GroupingSpec& grouping);

/// Permutation that only moves rows within their group.
std::vector<std::size_t> grouped_permutation(std::span<const std::size_t> groups, std::uint64_t key);

}  // namespace upfi
