// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>

#include "upfi/error.hpp"

namespace upfi {

namespace {

constexpr std::array<double, 4> kJitterLadder = {0.0, 1e-8, 1e-6, 1e-4};

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double s = (x.row(i) - x.row(j)).squaredNorm();
      d2(i, j) = s;
      d2(j, i) = s;
    }
  }
  return d2;
}

// Log marginal likelihood from precomputed pairwise squared distances.
LogMarginalLikelihood evaluate(const Eigen::MatrixXd& d2, const Eigen::VectorXd& y, const GpHyperparameters& h,
                               double jitter, bool with_gradient, Eigen::LLT<Eigen::MatrixXd>& llt) {
  const Eigen::Index n = y.size();
  const double inv_two_l2 = 1.0 / (2.0 * h.lengthscale * h.lengthscale);
  Eigen::MatrixXd kf = h.signal_variance * (-d2.array() * inv_two_l2).exp();
  Eigen::MatrixXd k = kf;
  k.diagonal().array() += h.noise_variance + jitter;
  llt.compute(k);
  LogMarginalLikelihood out;
  out.jitter = jitter;
  if (llt.info() != Eigen::Success) {
    out.value = -std::numeric_limits<double>::infinity();
    return out;
  }
  const Eigen::VectorXd r = y.array() - h.mean;
  const Eigen::VectorXd alpha = llt.solve(r);
  const double log_det_half = llt.matrixLLT().diagonal().array().log().sum();
  out.value = -0.5 * r.dot(alpha) - log_det_half - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (!with_gradient) return out;

  Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(n, n));
  w = alpha * alpha.transpose() - w;
  const double inv_l2 = 1.0 / (h.lengthscale * h.lengthscale);
  out.gradient[0] = 0.5 * (w.array() * kf.array()).sum();
  out.gradient[1] = 0.5 * (w.array() * kf.array() * d2.array()).sum() * inv_l2;
  out.gradient[2] = 0.5 * h.noise_variance * w.trace();
  out.gradient[3] = alpha.sum();
  return out;
}

LogMarginalLikelihood evaluate_with_ladder(const Eigen::MatrixXd& d2, const Eigen::VectorXd& y,
                                           const GpHyperparameters& h, bool with_gradient,
                                           Eigen::LLT<Eigen::MatrixXd>& llt) {
  for (double jitter : kJitterLadder) {
    auto result = evaluate(d2, y, h, jitter, with_gradient, llt);
    if (llt.info() == Eigen::Success) return result;
  }
  throw FitError("kernel matrix is not positive definite even with jitter 1e-4");
}

double population_sd(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

GpParameterVector to_parameters(const GpHyperparameters& h) {
  return {std::log(h.signal_variance), std::log(h.lengthscale), std::log(h.noise_variance), h.mean};
}

GpHyperparameters from_parameters(const GpParameterVector& p) {
  return {std::exp(p[0]), std::exp(p[1]), std::exp(p[2]), p[3]};
}

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double signal_variance,
                           double lengthscale) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  const double inv_two_l2 = 1.0 / (2.0 * lengthscale * lengthscale);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = signal_variance * std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv_two_l2);
    }
  }
  return k;
}

LogMarginalLikelihood log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                              const GpHyperparameters& h, bool with_gradient) {
  Eigen::LLT<Eigen::MatrixXd> llt;
  return evaluate_with_ladder(squared_distances(x), y, h, with_gradient, llt);
}

LogMarginalLikelihood log_marginal_likelihood_at_jitter(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                        const GpHyperparameters& h, double jitter,
                                                        bool with_gradient) {
  Eigen::LLT<Eigen::MatrixXd> llt;
  auto out = evaluate(squared_distances(x), y, h, jitter, with_gradient, llt);
  if (llt.info() != Eigen::Success) throw FitError("kernel matrix is not positive definite");
  return out;
}

GaussianProcess GaussianProcess::from_parts(FeatureMatrix train_x, std::vector<double> train_y,
                                            std::vector<std::string> feature_names, const GpHyperparameters& h,
                                            bool standardize_inputs, Standardizer input_scaler, double target_mean,
                                            double target_sd) {
  if (train_x.rows() < 1 || static_cast<std::size_t>(train_x.rows()) != train_y.size()) {
    throw InputError("GP training inputs and targets disagree in length");
  }
  if (feature_names.size() != static_cast<std::size_t>(train_x.cols())) {
    throw InputError("GP feature name count does not match input width");
  }
  if (!(h.signal_variance > 0 && h.lengthscale > 0 && h.noise_variance > 0) || !std::isfinite(h.mean)) {
    throw InputError("GP hyperparameters must be positive and finite");
  }
  if (!(target_sd > 0)) throw InputError("GP target scale must be > 0");
  if (standardize_inputs && input_scaler.size() != feature_names.size()) {
    throw InputError("GP input standardizer width mismatch");
  }
  GaussianProcess gp;
  gp.train_x_ = std::move(train_x);
  gp.train_y_ = std::move(train_y);
  gp.feature_names_ = std::move(feature_names);
  gp.hyper_ = h;
  gp.standardize_inputs_ = standardize_inputs;
  gp.input_scaler_ = std::move(input_scaler);
  gp.target_mean_ = target_mean;
  gp.target_sd_ = target_sd;
  gp.factorize();
  return gp;
}

void GaussianProcess::factorize() {
  const FeatureMatrix z = standardize_inputs_ ? input_scaler_.apply(train_x_) : train_x_;
  z_ = z;
  Eigen::VectorXd y(static_cast<Eigen::Index>(train_y_.size()));
  for (std::size_t i = 0; i < train_y_.size(); ++i) y(static_cast<Eigen::Index>(i)) = (train_y_[i] - target_mean_) / target_sd_;
  const auto result = evaluate_with_ladder(squared_distances(z_), y, hyper_, false, llt_);
  jitter_ = result.jitter;
  lml_ = result.value;
  alpha_ = llt_.solve((y.array() - hyper_.mean).matrix());
}

GaussianProcess GaussianProcess::condition(const Dataset& train, const GpHyperparameters& h, bool standardize_inputs) {
  if (!train.task().is_regression()) throw InputError("GP needs a regression dataset");
  if (!train.has_targets()) throw InputError("GP training data has no targets");
  const double mean = std::accumulate(train.target().begin(), train.target().end(), 0.0) /
                      static_cast<double>(train.num_rows());
  double sd = population_sd(train.target(), mean);
  if (!(sd > 0)) sd = 1.0;
  Standardizer scaler = standardize_inputs ? Standardizer::fit(train) : Standardizer();
  return from_parts(train.features(), train.target(), train.feature_names(), h, standardize_inputs,
                    std::move(scaler), mean, sd);
}

GaussianProcess GaussianProcess::fit(const Dataset& train, const GpFitConfig& config, GpFitTrace* trace) {
  if (!train.task().is_regression()) throw InputError("GP needs a regression dataset, got " + train.task().to_string());
  if (!train.has_targets()) throw InputError("GP training data has no targets");
  if (train.num_rows() < 2) throw InputError("GP fit needs at least 2 training rows");
  if (config.epochs < 0) throw InputError("epochs must be >= 0");
  if (!(config.learning_rate > 0)) throw InputError("learning rate must be > 0");
  if (!(config.noise_floor > 0)) throw InputError("noise floor must be > 0");

  const double mean = std::accumulate(train.target().begin(), train.target().end(), 0.0) /
                      static_cast<double>(train.num_rows());
  double sd = population_sd(train.target(), mean);
  if (!(sd > 0)) sd = 1.0;
  Standardizer scaler = config.standardize_inputs ? Standardizer::fit(train) : Standardizer();
  const Eigen::MatrixXd z = config.standardize_inputs ? Eigen::MatrixXd(scaler.apply(train.features()))
                                                      : Eigen::MatrixXd(train.features());
  Eigen::VectorXd y(static_cast<Eigen::Index>(train.num_rows()));
  for (std::size_t i = 0; i < train.num_rows(); ++i) y(static_cast<Eigen::Index>(i)) = (train.target()[i] - mean) / sd;

  GpHyperparameters init = config.init;
  init.mean = y.mean();  // 0 up to rounding
  init.noise_variance = std::max(init.noise_variance, config.noise_floor);
  GpParameterVector theta = to_parameters(init);
  const double log_noise_floor = std::log(config.noise_floor);

  // Adam ascent on the log marginal likelihood.
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  GpParameterVector m{}, v{};
  const Eigen::MatrixXd d2 = squared_distances(z);
  Eigen::LLT<Eigen::MatrixXd> llt;
  GpFitTrace local;
  for (int t = 1; t <= config.epochs; ++t) {
    const auto lml = evaluate_with_ladder(d2, y, from_parameters(theta), true, llt);
    if (t == 1) local.initial_lml = lml.value;
    local.lml_history.push_back(lml.value);
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    for (std::size_t p = 0; p < theta.size(); ++p) {
      const double g = lml.gradient[p];
      m[p] = kBeta1 * m[p] + (1.0 - kBeta1) * g;
      v[p] = kBeta2 * v[p] + (1.0 - kBeta2) * g * g;
      theta[p] += config.learning_rate * (m[p] / c1) / (std::sqrt(v[p] / c2) + kEps);
    }
    theta[2] = std::max(theta[2], log_noise_floor);
  }

  GaussianProcess gp = from_parts(train.features(), train.target(), train.feature_names(), from_parameters(theta),
                                  config.standardize_inputs, std::move(scaler), mean, sd);
  if (config.epochs == 0) local.initial_lml = gp.lml_;
  local.final_lml = gp.lml_;
  if (trace) *trace = std::move(local);
  return gp;
}

std::vector<double> GaussianProcess::to_internal(std::span<const double> x) const {
  if (x.size() != num_features()) throw InputError("GP input has wrong width");
  if (standardize_inputs_) return input_scaler_.apply(x);
  return {x.begin(), x.end()};
}

Gaussian GaussianProcess::predict(std::span<const double> x) const {
  const std::vector<double> zx = to_internal(x);
  const Eigen::Map<const Eigen::RowVectorXd> q(zx.data(), static_cast<Eigen::Index>(zx.size()));
  const Eigen::Index n = z_.rows();
  const double inv_two_l2 = 1.0 / (2.0 * hyper_.lengthscale * hyper_.lengthscale);
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks(i) = hyper_.signal_variance * std::exp(-(z_.row(i) - q).squaredNorm() * inv_two_l2);
  const double mean = hyper_.mean + ks.dot(alpha_);
  llt_.matrixL().solveInPlace(ks);
  const double latent = std::max(hyper_.signal_variance - ks.squaredNorm(), 0.0);
  const double variance = latent + hyper_.noise_variance;
  return Gaussian(target_mean_ + target_sd_ * mean, variance * target_sd_ * target_sd_);
}

PredictiveDistribution GaussianProcess::predict_dist(std::span<const double> x) const { return predict(x); }

std::vector<PredictiveDistribution> GaussianProcess::predict_batch(const FeatureMatrix& x) const {
  std::vector<PredictiveDistribution> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.emplace_back(predict(row_span(x, i)));
  return out;
}

}  // namespace upfi
