// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "upfi/error.hpp"

namespace upfi {

namespace {

struct Targets {
  std::vector<double> t;
  double mean = 0.0;
};

Targets smoothed_targets(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
  double pos = 0.0, neg = 0.0;
  for (int label : labels) {
    if (label == 1) {
      pos += 1.0;
    } else if (label == 0) {
      neg += 1.0;
    } else {
      throw InputError("calibration labels must be 0 or 1");
    }
  }
  if (pos == 0.0 || neg == 0.0) throw InputError("calibration needs both positive and negative labels");
  const double hi = (pos + 1.0) / (pos + 2.0);
  const double lo = 1.0 / (neg + 2.0);
  Targets out;
  out.t.reserve(labels.size());
  for (int label : labels) out.t.push_back(label == 1 ? hi : lo);
  for (double t : out.t) out.mean += t;
  out.mean /= static_cast<double>(out.t.size());
  return out;
}

// Numerically stable sum of t*f + log(1 + exp(-f)), f = a*s + b.
double loss_with_targets(std::span<const double> scores, const std::vector<double>& t, double a, double b) {
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double f = a * scores[i] + b;
    total += f >= 0.0 ? t[i] * f + std::log1p(std::exp(-f)) : (t[i] - 1.0) * f + std::log1p(std::exp(f));
  }
  return total;
}

}  // namespace

double SigmoidCalibration::operator()(double score) const {
  const double f = a * score + b;
  if (f >= 0.0) {
    const double e = std::exp(-f);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(f));
}

double platt_loss(std::span<const double> scores, std::span<const int> labels, double a, double b) {
  const Targets targets = smoothed_targets(scores, labels);
  return loss_with_targets(scores, targets.t, a, b);
}

SigmoidCalibration fit_sigmoid_calibration(std::span<const double> scores, std::span<const int> labels,
                                           const PlattOptions& options) {
  const Targets targets = smoothed_targets(scores, labels);
  const auto& t = targets.t;
  const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double n_neg = static_cast<double>(labels.size()) - n_pos;

  constexpr double kMinStep = 1e-10;
  constexpr double kHessianRidge = 1e-12;
  double a = 0.0;
  double b = std::log((n_neg + 1.0) / (n_pos + 1.0));
  double fval = loss_with_targets(scores, t, a, b);
  bool converged = false;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    double h11 = kHessianRidge, h22 = kHessianRidge, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double f = a * scores[i] + b;
      double p, q;
      if (f >= 0.0) {
        const double e = std::exp(-f);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(f);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = t[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::hypot(g1, g2) <= options.gradient_tolerance) {
      converged = true;
      break;
    }
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    bool moved = false;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = loss_with_targets(scores, t, na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // No representable descent left: accept if the gradient is at rounding level.
      const double scale = static_cast<double>(scores.size());
      converged = std::hypot(g1, g2) <= 1e-6 * std::max(1.0, scale);
      break;
    }
  }
  if (!converged) {
    throw CalibrationError("sigmoid calibration did not converge in " + std::to_string(options.max_iterations) +
                           " iterations");
  }
  if (options.nonpositive_slope && a > 0.0) {
    // The loss is convex, so the constrained optimum sits on a = 0.
    a = 0.0;
    b = std::log((1.0 - targets.mean) / targets.mean);
  }
  return {a, b};
}

}  // namespace upfi
