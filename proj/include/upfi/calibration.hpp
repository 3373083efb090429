// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace upfi {

/// Platt sigmoid p(s) = 1 / (1 + exp(a * s + b)).
struct SigmoidCalibration {
  double a = -1.0;
  double b = 0.0;

  double operator()(double score) const;
};

struct PlattOptions {
  /// Restrict a <= 0 so a higher score never lowers the probability.
  bool nonpositive_slope = false;
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
};

/// Cross-entropy of the sigmoid against Platt's smoothed targets
/// (N+ + 1) / (N+ + 2) for positives and 1 / (N- + 2) for negatives.
double platt_loss(std::span<const double> scores, std::span<const int> labels, double a, double b);

/// Fits (a, b) by damped Newton iterations with backtracking line search on
/// platt_loss. Labels are 0/1 and both must be present (InputError).
/// Throws CalibrationError when the gradient norm does not reach the
/// tolerance within max_iterations.
SigmoidCalibration fit_sigmoid_calibration(std::span<const double> scores, std::span<const int> labels,
                                           const PlattOptions& options = {});

}  // namespace upfi
