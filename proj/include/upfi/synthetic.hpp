// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "upfi/dataset.hpp"

namespace upfi {

// All generators draw row i from its own stream keyed by (seed, generator, i),
// so outputs are pure functions of the config on every platform.

enum class MeaseVariant { kOriginal, kCopyInformative, kCopyUninformative };

std::string to_string(MeaseVariant v);
/// Accepts original, copy-informative, copy-uninformative ('_' also accepted).
MeaseVariant parse_mease_variant(const std::string& name);

/// Binary labels with P(Y=1 | x) = eps + (1 - 2 eps) [x_1 + ... + x_J > J/2],
/// x uniform on [0, 1]^d. The copy variants overwrite the last feature with
/// feature 1 (informative) or feature 5 (uninformative) after labels are drawn.
/// Class 1 is label "0", class 2 is label "1".
struct MeaseConfig {
  std::size_t n = 5000;
  std::size_t d = 10;
  std::size_t relevant = 4;  // J
  double eps = 0.1;
  MeaseVariant variant = MeaseVariant::kOriginal;
  std::uint64_t seed = 0;
};

double mease_probability(std::span<const double> x, std::size_t relevant, double eps);
Dataset gen_mease(const MeaseConfig& cfg);

/// Y = X1 + X2 + 0.9 X3^2 + X4 + X5 + noise_sd * N(0, 1) with (X1, X2) and
/// (X3, X4) bivariate normal (unit variances, covariance 0.8) and X5 ~ N(0, 1).
struct CorrRegressionConfig {
  std::size_t n = 1000;
  double noise_sd = std::sqrt(2.0);
  std::uint64_t seed = 0;
};

/// Noise-free part of the target, evaluated in the generator's exact order.
double corr_regression_signal(std::span<const double> x);
Dataset gen_corr_regression(const CorrRegressionConfig& cfg);

/// Two features uniform on the square frame inner <= max(|x1|, |x2|) <= outer,
/// target Y = (x1 + x2)^2 + noise_sd * N(0, 1). A strip of the frame is chosen
/// with probability proportional to its area, then a point uniformly within it.
struct BorderConfig {
  std::size_t n = 1000;
  double inner = 1.5;
  double outer = 2.5;
  double noise_sd = 0.1;
  std::uint64_t seed = 0;
};

Dataset gen_border(const BorderConfig& cfg);

}  // namespace upfi
