// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations used to check the library. None of
// these call into the code they check beyond plain data accessors.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace upfi::oracle {

using Matrix = std::vector<std::vector<double>>;

// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (a[p][c] == 0.0) throw std::runtime_error("singular system");
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

inline double rbf(std::span<const double> a, std::span<const double> b, double sf2, double ell) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  return sf2 * std::exp(-0.5 * d2 / (ell * ell));
}

struct NaiveGpPrediction {
  double mean;
  double variance;
};

// Exact GP posterior predictive in original units, redone from scratch for
// each query: inputs optionally standardized (population sd, constant
// columns untouched), targets standardized, then one dense solve per query.
inline NaiveGpPrediction naive_gp_predict(const Matrix& x, const std::vector<double>& y, std::span<const double> query,
                                          double sf2, double ell, double sn2, double mean, bool standardize_inputs) {
  const std::size_t n = x.size();
  const std::size_t d = query.size();
  std::vector<double> mu(d, 0.0), sd(d, 1.0);
  if (standardize_inputs) {
    for (std::size_t k = 0; k < d; ++k) {
      double m = 0.0;
      for (const auto& row : x) m += row[k];
      m /= static_cast<double>(n);
      double v = 0.0;
      for (const auto& row : x) v += (row[k] - m) * (row[k] - m);
      v /= static_cast<double>(n);
      if (v > 0.0) {
        mu[k] = m;
        sd[k] = std::sqrt(v);
      }
    }
  }
  double ym = 0.0;
  for (double v : y) ym += v;
  ym /= static_cast<double>(n);
  double yv = 0.0;
  for (double v : y) yv += (v - ym) * (v - ym);
  yv /= static_cast<double>(n);
  const double ys = yv > 0.0 ? std::sqrt(yv) : 1.0;

  Matrix z(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) z[i][k] = (x[i][k] - mu[k]) / sd[k];
  }
  std::vector<double> q(d);
  for (std::size_t k = 0; k < d; ++k) q[k] = (query[k] - mu[k]) / sd[k];

  Matrix kmat(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) kmat[i][k] = rbf(z[i], z[k], sf2, ell) + (i == k ? sn2 : 0.0);
  }
  std::vector<double> resid(n), kstar(n);
  for (std::size_t i = 0; i < n; ++i) {
    resid[i] = (y[i] - ym) / ys - mean;
    kstar[i] = rbf(z[i], q, sf2, ell);
  }
  const auto alpha = solve(kmat, resid);
  const auto v = solve(kmat, kstar);
  double m = mean, reduce = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m += kstar[i] * alpha[i];
    reduce += kstar[i] * v[i];
  }
  const double latent = std::max(0.0, sf2 - reduce);
  return {ym + ys * m, (latent + sn2) * ys * ys};
}

// Platt's objective written out directly.
inline double platt_objective(std::span<const double> s, std::span<const int> t, double a, double b) {
  double pos = 0.0, neg = 0.0;
  for (int v : t) (v ? pos : neg) += 1.0;
  const double hi = (pos + 1.0) / (pos + 2.0);
  const double lo = 1.0 / (neg + 2.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double target = t[i] ? hi : lo;
    const double p = 1.0 / (1.0 + std::exp(a * s[i] + b));
    loss -= target * std::log(p) + (1.0 - target) * std::log1p(-p);
  }
  return loss;
}

struct GridOptimum {
  double a;
  double b;
  double loss;
};

// Exhaustive search over [lo, hi]^2 with the given step.
inline GridOptimum platt_grid_search(std::span<const double> s, std::span<const int> t, double lo = -20.0,
                                     double hi = 20.0, double step = 0.01) {
  GridOptimum best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  const auto steps = static_cast<long>(std::llround((hi - lo) / step));
  for (long ia = 0; ia <= steps; ++ia) {
    const double a = lo + step * static_cast<double>(ia);
    for (long ib = 0; ib <= steps; ++ib) {
      const double b = lo + step * static_cast<double>(ib);
      const double l = platt_objective(s, t, a, b);
      if (l < best.loss) best = {a, b, l};
    }
  }
  return best;
}

// Grid search that repeatedly re-centres a 41x41 grid on the best point and
// shrinks it tenfold, starting from a coarse grid over [lo, hi]^2.
inline GridOptimum platt_zoom_search(std::span<const double> s, std::span<const int> t, double lo = -20.0,
                                     double hi = 20.0, int rounds = 8) {
  GridOptimum best = platt_grid_search(s, t, lo, hi, 0.1);
  double half = 0.1;
  for (int r = 0; r < rounds; ++r) {
    const GridOptimum centre = best;
    for (int ia = -20; ia <= 20; ++ia) {
      for (int ib = -20; ib <= 20; ++ib) {
        const double a = centre.a + half * ia / 20.0;
        const double b = centre.b + half * ib / 20.0;
        const double l = platt_objective(s, t, a, b);
        if (l < best.loss) best = {a, b, l};
      }
    }
    half /= 10.0;
  }
  return best;
}

// Central difference of f along coordinate k of p.
template <class F, class P>
double central_difference(F&& f, P p, std::size_t k, double h) {
  P up = p, down = p;
  up[k] += h;
  down[k] -= h;
  return (f(up) - f(down)) / (2.0 * h);
}

}  // namespace upfi::oracle
