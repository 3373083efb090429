// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "upfi/error.hpp"

namespace upfi {

namespace {
constexpr double kNormalizationTolerance = 1e-9;
const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

int class_index(double y, int k) {
  if (!std::isfinite(y) || y != std::floor(y) || y < 1 || y > k) {
    throw InputError("class index " + std::to_string(y) + " outside [1, " + std::to_string(k) + "]");
  }
  return static_cast<int>(y);
}
}  // namespace

TaskKind TaskKind::classification(int k) {
  if (k < 2) throw InputError("classification needs at least 2 classes, got " + std::to_string(k));
  return {Kind::kClassification, k};
}

std::string TaskKind::to_string() const {
  return is_regression() ? std::string("regression")
                         : "classification(" + std::to_string(num_classes) + ")";
}

Categorical::Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) throw InputError("categorical distribution needs k >= 2 classes");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InputError("categorical probability must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw InputError("categorical probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

int Categorical::argmax() const {
  return static_cast<int>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin()) + 1;
}

Gaussian::Gaussian(double mean, double variance) : mean_(mean), variance_(variance) {
  if (!std::isfinite(mean)) throw InputError("gaussian mean must be finite");
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InputError("gaussian variance must be finite and > 0");
  }
}

double entropy(const Categorical& dist) {
  double h = 0.0;
  for (double p : dist.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double entropy(const Gaussian& dist) { return 0.5 + kHalfLogTwoPi + 0.5 * std::log(dist.variance()); }

double entropy(const PredictiveDistribution& dist) {
  return std::visit([](const auto& d) { return entropy(d); }, dist);
}

double nll(const Categorical& dist, double y) {
  const int c = class_index(y, dist.num_classes());
  return -std::log(std::max(dist.prob(c), kProbabilityFloor));
}

double nll(const Gaussian& dist, double y) {
  if (!std::isfinite(y)) throw InputError("regression target must be finite");
  const double r = y - dist.mean();
  return kHalfLogTwoPi + 0.5 * std::log(dist.variance()) + 0.5 * r * r / dist.variance();
}

double nll(const PredictiveDistribution& dist, double y) {
  return std::visit([y](const auto& d) { return nll(d, y); }, dist);
}

double predictive_mean(const PredictiveDistribution& dist, int cls) {
  if (const auto* g = std::get_if<Gaussian>(&dist)) return g->mean();
  const auto& c = std::get<Categorical>(dist);
  if (cls < 1 || cls > c.num_classes()) throw InputError("traced class " + std::to_string(cls) + " out of range");
  return c.prob(cls);
}

bool matches(const PredictiveDistribution& dist, const TaskKind& task) {
  if (task.is_regression()) return std::holds_alternative<Gaussian>(dist);
  const auto* c = std::get_if<Categorical>(&dist);
  return c != nullptr && c->num_classes() == task.num_classes;
}

}  // namespace upfi
