// Copyright 2026 The qacq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QACQ_GP_FIT_HPP
#define QACQ_GP_FIT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "qacq/errors.hpp"
#include "qacq/kernel.hpp"
#include "qacq/linalg.hpp"
#include "qacq/rng.hpp"
#include "qacq/types.hpp"

namespace qacq {

/// Independent log-normal priors on the positive hyperparameters (flat prior
/// on the mean constant) plus the optimizer settings for the MAP search.
/// Prior locations refer to the standardized-output scale.
struct FitConfig {
  double ls_log_mean = 0.0;
  double ls_log_sd = 1.0;
  double signal_log_mean = 0.0;
  double signal_log_sd = 1.0;
  double noise_log_mean = -6.0;
  double noise_log_sd = 1.0;
  double noise_floor = 1e-8;  // lower clamp on the fitted noise variance
  int iterations = 150;
  double step_size = 0.05;
  std::uint64_t seed = 0;
};

namespace detail {

/// Log marginal likelihood plus log prior and its gradient, in the
/// parameterization (log lengthscales, log signal var, log noise var, mean).
struct FitObjective {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& y;
  const FitConfig& cfg;

  double operator()(const Eigen::VectorXd& params,
                    Eigen::VectorXd& grad) const {
    const auto n = x.rows();
    const auto d = x.cols();
    const Eigen::VectorXd ls = params.head(d).array().exp();
    const double s2 = std::exp(params(d));
    const double noise = std::exp(params(d + 1));
    const double mean = params(d + 2);

    Hyperparams hp;
    hp.lengthscales = ls;
    hp.signal_variance = s2;
    hp.noise_variance = noise;
    hp.mean_constant = mean;

    const Eigen::MatrixXd k = matern52_cross_covariance(x, x, hp);
    Eigen::MatrixXd a = k;
    a.diagonal().array() += noise;
    const auto fac = stable_cholesky(a);
    const Eigen::VectorXd resid = y.array() - mean;
    const Eigen::VectorXd alpha = chol_solve(fac.chol, resid);

    double lml = -0.5 * resid.dot(alpha);
    lml -= fac.chol.diagonal().array().log().sum();
    lml -= 0.5 * static_cast<double>(n) * std::log(2.0 * kPi);

    // W = alpha alpha^T - A^{-1}; dLML/dtheta = 0.5 tr(W dA/dtheta).
    Eigen::MatrixXd a_inv =
        chol_solve_mat(fac.chol, Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd w = alpha * alpha.transpose() - a_inv;

    grad.resize(d + 3);
    for (Eigen::Index c = 0; c < d; ++c) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const double r =
              scaled_distance(x.row(i), x.row(j), hp.lengthscales);
          const double delta = x(i, c) - x(j, c);
          const double dk = s2 * (5.0 / 3.0) * (1.0 + kSqrt5 * r) *
                            std::exp(-kSqrt5 * r) * delta * delta /
                            (ls(c) * ls(c));
          acc += w(i, j) * dk;  // symmetric pair counted once here
        }
      }
      grad(c) = acc;  // 0.5 * 2 * sum over upper triangle
    }
    grad(d) = 0.5 * (w.array() * k.array()).sum();
    grad(d + 1) = 0.5 * noise * w.trace();
    grad(d + 2) = alpha.sum();

    // Log-normal priors in log space; flat prior on the mean.
    double lp = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double u = (params(c) - cfg.ls_log_mean) / cfg.ls_log_sd;
      lp -= 0.5 * u * u;
      grad(c) -= u / cfg.ls_log_sd;
    }
    {
      const double u = (params(d) - cfg.signal_log_mean) / cfg.signal_log_sd;
      lp -= 0.5 * u * u;
      grad(d) -= u / cfg.signal_log_sd;
    }
    {
      const double u =
          (params(d + 1) - cfg.noise_log_mean) / cfg.noise_log_sd;
      lp -= 0.5 * u * u;
      grad(d + 1) -= u / cfg.noise_log_sd;
    }
    return lml + lp;
  }
};

inline void clamp_fit_params(Eigen::VectorXd& params, Eigen::Index d,
                             double log_noise_floor) {
  for (Eigen::Index c = 0; c < d; ++c) {
    params(c) = std::clamp(params(c), -6.0, 6.0);
  }
  params(d) = std::clamp(params(d), -12.0, 8.0);
  params(d + 1) = std::clamp(params(d + 1), log_noise_floor, 5.0);
}

}  // namespace detail

/// MAP estimate of the surrogate hyperparameters: gradient ascent (Adam) on
/// the log marginal likelihood plus log prior, in log space, from `restarts`
/// prior-sampled starting points.  Outputs are standardized internally and
/// the result is mapped back to the raw scale.
inline Hyperparams fit_hyperparameters_map(const Dataset& data,
                                           const FitConfig& cfg = {},
                                           int restarts = 8) {
  data.validate();
  const auto n = data.size();
  const auto d = data.dim;
  if (n < 2) throw InputError("fit_hyperparameters_map: need n >= 2");
  if (restarts < 1) throw ConfigError("fit_hyperparameters_map: restarts");

  const double y_mean = data.outputs.mean();
  const double y_sd = std::sqrt(
      (data.outputs.array() - y_mean).square().sum() /
      static_cast<double>(n));

  // Flat data admits a noiseless constant explanation; pin everything to
  // the floor instead of optimizing a degenerate standardized problem.
  if (y_sd < 1e-12) {
    Hyperparams hp;
    hp.lengthscales = Eigen::VectorXd::Ones(d);
    hp.signal_variance = 1e-12;
    hp.noise_variance = cfg.noise_floor;
    hp.mean_constant = y_mean;
    return hp;
  }

  const Eigen::VectorXd y_std =
      ((data.outputs.array() - y_mean) / y_sd).matrix();
  const detail::FitObjective objective{data.inputs, y_std, cfg};
  const double log_noise_floor = std::log(std::max(cfg.noise_floor, 1e-300));

  double best_value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_params;
  int failures = 0;
  std::string last_error;

  const CounterRng rng(derive_seed(cfg.seed, 0xF17ULL));
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd params(d + 3);
    if (r == 0) {
      // First restart at the prior modes.
      params.head(d).setConstant(cfg.ls_log_mean);
      params(d) = cfg.signal_log_mean;
      params(d + 1) = cfg.noise_log_mean;
      params(d + 2) = 0.0;
    } else {
      const std::uint64_t base = static_cast<std::uint64_t>(r) * 64;
      for (Eigen::Index c = 0; c < d; ++c) {
        params(c) = cfg.ls_log_mean + cfg.ls_log_sd * rng.normal(base + c);
      }
      params(d) = cfg.signal_log_mean + cfg.signal_log_sd * rng.normal(base + 32);
      params(d + 1) = cfg.noise_log_mean + cfg.noise_log_sd * rng.normal(base + 33);
      params(d + 2) = 0.5 * rng.normal(base + 34);
    }
    detail::clamp_fit_params(params, d, log_noise_floor);

    try {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(d + 3);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 3);
      Eigen::VectorXd grad(d + 3);
      double b1t = 1.0, b2t = 1.0;
      for (int it = 0; it < cfg.iterations; ++it) {
        objective(params, grad);
        m = 0.9 * m + 0.1 * grad;
        v = 0.999 * v.array() + 0.001 * grad.array().square();
        b1t *= 0.9;
        b2t *= 0.999;
        const Eigen::VectorXd m_hat = m / (1.0 - b1t);
        const Eigen::VectorXd v_hat = v / (1.0 - b2t);
        params.array() +=
            cfg.step_size * m_hat.array() / (v_hat.array().sqrt() + 1e-8);
        detail::clamp_fit_params(params, d, log_noise_floor);
      }
      Eigen::VectorXd unused(d + 3);
      const double value = objective(params, unused);
      if (std::isfinite(value) && value > best_value) {
        best_value = value;
        best_params = params;
      }
    } catch (const Error& e) {
      ++failures;
      last_error = e.what();
    }
  }

  if (best_params.size() == 0) {
    throw FitError("fit_hyperparameters_map: all " +
                   std::to_string(restarts) + " restarts failed (" +
                   std::to_string(failures) + " errors; last: " + last_error +
                   ")");
  }

  Hyperparams hp;
  hp.lengthscales = best_params.head(d).array().exp();
  hp.signal_variance = std::exp(best_params(d)) * y_sd * y_sd;
  hp.noise_variance =
      std::max(std::exp(best_params(d + 1)) * y_sd * y_sd,
               cfg.noise_floor);
  hp.mean_constant = best_params(d + 2) * y_sd + y_mean;
  hp.validate();
  return hp;
}

}  // namespace qacq

#endif  // QACQ_GP_FIT_HPP
