// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "upfi/dataset.hpp"
#include "upfi/model.hpp"

namespace upfi {

/// Hyperparameters of k(x, x') = signal_variance * exp(-|x - x'|^2 / (2 lengthscale^2))
/// with Gaussian observation noise and a constant mean. Values live in the
/// model's internal units (standardized inputs and targets).
struct GpHyperparameters {
  double signal_variance = 1.0;
  double lengthscale = 1.0;
  double noise_variance = 0.1;
  double mean = 0.0;
};

/// Optimized coordinates: (log signal var, log lengthscale, log noise var, mean).
using GpParameterVector = std::array<double, 4>;

GpParameterVector to_parameters(const GpHyperparameters& h);
GpHyperparameters from_parameters(const GpParameterVector& p);

struct LogMarginalLikelihood {
  double value = 0.0;
  GpParameterVector gradient{};  // w.r.t. GpParameterVector coordinates
  double jitter = 0.0;           // diagonal jitter the factorization needed
};

/// Exact log marginal likelihood log N(y | mean, K + noise I) and its gradient.
/// Escalates jitter 0 -> 1e-8 -> 1e-6 -> 1e-4 on Cholesky failure, then throws FitError.
LogMarginalLikelihood log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                              const GpHyperparameters& h, bool with_gradient = true);

/// Same with a fixed diagonal jitter and no escalation (for finite differences).
LogMarginalLikelihood log_marginal_likelihood_at_jitter(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                        const GpHyperparameters& h, double jitter,
                                                        bool with_gradient = true);

struct GpFitConfig {
  double learning_rate = 0.1;
  int epochs = 1000;
  GpHyperparameters init{};  // init.mean is ignored: the mean starts at the (standardized) target mean
  bool standardize_inputs = true;
  double noise_floor = 1e-6;  // lower bound on noise variance, internal units
  std::uint64_t seed = 0;     // recorded; fitting itself draws no random numbers
};

struct GpFitTrace {
  double initial_lml = 0.0;
  double final_lml = 0.0;
  std::vector<double> lml_history;  // value before each step
};

/// Exact GP regression with an RBF x scale kernel and a constant mean.
///
/// Inputs are optionally standardized with a Standardizer fitted on the
/// training set; targets are always standardized internally and predictions
/// mapped back (mean shifted/scaled, variance scaled by sd^2). Prediction adds
/// the noise variance, so predictive variance >= noise variance.
class GaussianProcess final : public ProbabilisticModel {
 public:
  /// Maximizes the log marginal likelihood with Adam on log-parameters.
  static GaussianProcess fit(const Dataset& train, const GpFitConfig& config, GpFitTrace* trace = nullptr);

  /// Conditions on training data at fixed hyperparameters (internal units).
  static GaussianProcess condition(const Dataset& train, const GpHyperparameters& h, bool standardize_inputs);

  /// Rebuilds a model from stored parts; the factorization is recomputed.
  static GaussianProcess from_parts(FeatureMatrix train_x, std::vector<double> train_y,
                                    std::vector<std::string> feature_names, const GpHyperparameters& h,
                                    bool standardize_inputs, Standardizer input_scaler, double target_mean,
                                    double target_sd);

  TaskKind task() const override { return TaskKind::regression(); }
  std::size_t num_features() const override { return feature_names_.size(); }
  PredictiveDistribution predict_dist(std::span<const double> x) const override;
  std::vector<PredictiveDistribution> predict_batch(const FeatureMatrix& x) const override;

  Gaussian predict(std::span<const double> x) const;

  const GpHyperparameters& hyperparameters() const { return hyper_; }
  /// Noise variance in target units.
  double noise_variance() const { return hyper_.noise_variance * target_sd_ * target_sd_; }
  /// Signal variance in target units.
  double signal_variance() const { return hyper_.signal_variance * target_sd_ * target_sd_; }
  double target_mean() const { return target_mean_; }
  double target_sd() const { return target_sd_; }
  bool standardize_inputs() const { return standardize_inputs_; }
  const Standardizer& input_scaler() const { return input_scaler_; }
  const FeatureMatrix& train_x() const { return train_x_; }
  const std::vector<double>& train_y() const { return train_y_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  double jitter() const { return jitter_; }
  double log_marginal_likelihood() const { return lml_; }

 private:
  GaussianProcess() = default;
  void factorize();
  std::vector<double> to_internal(std::span<const double> x) const;

  FeatureMatrix train_x_;  // original units
  std::vector<double> train_y_;
  std::vector<std::string> feature_names_;
  GpHyperparameters hyper_;
  bool standardize_inputs_ = true;
  Standardizer input_scaler_;
  double target_mean_ = 0.0;
  double target_sd_ = 1.0;

  Eigen::MatrixXd z_;  // internal-unit inputs, n x d
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;  // (K + noise I)^-1 (y - mean), internal units
  double jitter_ = 0.0;
  double lml_ = 0.0;
};

/// Squared exponential kernel matrix between rows of a and rows of b.
Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double signal_variance,
                           double lengthscale);

}  // namespace upfi
