// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/synthetic.hpp"

#include <algorithm>

#include "upfi/error.hpp"
#include "upfi/rng.hpp"

namespace upfi {

namespace {

std::vector<std::string> numbered_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= d; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

}  // namespace

std::string to_string(MeaseVariant v) {
  switch (v) {
    case MeaseVariant::kOriginal:
      return "original";
    case MeaseVariant::kCopyInformative:
      return "copy-informative";
    case MeaseVariant::kCopyUninformative:
      break;
  }
  return "copy-uninformative";
}

MeaseVariant parse_mease_variant(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "original") return MeaseVariant::kOriginal;
  if (n == "copy-informative") return MeaseVariant::kCopyInformative;
  if (n == "copy-uninformative") return MeaseVariant::kCopyUninformative;
  throw InputError("unknown Mease variant '" + name + "' (valid: original, copy-informative, copy-uninformative)");
}

double mease_probability(std::span<const double> x, std::size_t relevant, double eps) {
  double total = 0.0;
  for (std::size_t j = 0; j < relevant; ++j) total += x[j];
  const bool on = total > static_cast<double>(relevant) / 2.0;
  return eps + (1.0 - 2.0 * eps) * (on ? 1.0 : 0.0);
}

Dataset gen_mease(const MeaseConfig& cfg) {
  if (cfg.n < 1 || cfg.d < 1) throw InputError("Mease generator needs n >= 1 and d >= 1");
  if (cfg.relevant < 1 || cfg.relevant > cfg.d) throw InputError("Mease generator needs 1 <= J <= d");
  if (!(cfg.eps >= 0.0 && cfg.eps < 0.5)) throw InputError("Mease label noise must lie in [0, 0.5)");
  if (cfg.variant == MeaseVariant::kCopyInformative && cfg.d < 2) throw InputError("copy-informative needs d >= 2");
  if (cfg.variant == MeaseVariant::kCopyUninformative && cfg.d < 6) {
    throw InputError("copy-uninformative needs d >= 6 (feature 5 copied into feature d)");
  }
  FeatureMatrix x(static_cast<Eigen::Index>(cfg.n), static_cast<Eigen::Index>(cfg.d));
  std::vector<double> y(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    CounterRng rng(derive_key(cfg.seed, "mease", {i}));
    for (std::size_t j = 0; j < cfg.d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.uniform();
    const double p = mease_probability(row_span(x, static_cast<Eigen::Index>(i)), cfg.relevant, cfg.eps);
    y[i] = rng.bernoulli(p) ? 2.0 : 1.0;
  }
  const auto last = static_cast<Eigen::Index>(cfg.d - 1);
  if (cfg.variant == MeaseVariant::kCopyInformative) x.col(last) = x.col(0);
  if (cfg.variant == MeaseVariant::kCopyUninformative) x.col(last) = x.col(4);
  return Dataset(std::move(x), std::move(y), numbered_names(cfg.d), TaskKind::classification(2), {"0", "1"});
}

double corr_regression_signal(std::span<const double> x) {
  return x[0] + x[1] + 0.9 * x[2] * x[2] + x[3] + x[4];
}

Dataset gen_corr_regression(const CorrRegressionConfig& cfg) {
  if (cfg.n < 1) throw InputError("regression generator needs n >= 1");
  if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) throw InputError("noise sd must be finite and >= 0");
  // Cholesky factor of [[1, 0.8], [0.8, 1]].
  constexpr double kRho = 0.8;
  const double tail = std::sqrt(1.0 - kRho * kRho);
  FeatureMatrix x(static_cast<Eigen::Index>(cfg.n), 5);
  std::vector<double> y(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    CounterRng rng(derive_key(cfg.seed, "corr-regression", {i}));
    const auto r = static_cast<Eigen::Index>(i);
    const double z1 = rng.normal(), z2 = rng.normal(), z3 = rng.normal(), z4 = rng.normal(), z5 = rng.normal();
    const double noise = rng.normal();
    x(r, 0) = z1;
    x(r, 1) = kRho * z1 + tail * z2;
    x(r, 2) = z3;
    x(r, 3) = kRho * z3 + tail * z4;
    x(r, 4) = z5;
    y[i] = corr_regression_signal(row_span(x, r)) + cfg.noise_sd * noise;
  }
  return Dataset(std::move(x), std::move(y), numbered_names(5), TaskKind::regression());
}

Dataset gen_border(const BorderConfig& cfg) {
  if (cfg.n < 1) throw InputError("border generator needs n >= 1");
  if (!(cfg.inner > 0.0 && cfg.outer > cfg.inner)) throw InputError("border generator needs 0 < inner < outer");
  if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) throw InputError("noise sd must be finite and >= 0");
  const double width = cfg.outer - cfg.inner;
  const double long_area = 2.0 * cfg.outer * width;   // top / bottom strips span the full width
  const double short_area = 2.0 * cfg.inner * width;  // left / right strips between them
  const double total = 2.0 * long_area + 2.0 * short_area;
  FeatureMatrix x(static_cast<Eigen::Index>(cfg.n), 2);
  std::vector<double> y(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    CounterRng rng(derive_key(cfg.seed, "border", {i}));
    const double pick = rng.uniform() * total;
    double x1, x2;
    if (pick < long_area) {
      x1 = rng.uniform(-cfg.outer, cfg.outer);
      x2 = rng.uniform(cfg.inner, cfg.outer);
    } else if (pick < 2.0 * long_area) {
      x1 = rng.uniform(-cfg.outer, cfg.outer);
      x2 = -rng.uniform(cfg.inner, cfg.outer);
    } else if (pick < 2.0 * long_area + short_area) {
      x1 = -rng.uniform(cfg.inner, cfg.outer);
      x2 = rng.uniform(-cfg.inner, cfg.inner);
    } else {
      x1 = rng.uniform(cfg.inner, cfg.outer);
      x2 = rng.uniform(-cfg.inner, cfg.inner);
    }
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = x1;
    x(r, 1) = x2;
    const double s = x1 + x2;
    y[i] = s * s + cfg.noise_sd * rng.normal();
  }
  return Dataset(std::move(x), std::move(y), {"x1", "x2"}, TaskKind::regression());
}

}  // namespace upfi
