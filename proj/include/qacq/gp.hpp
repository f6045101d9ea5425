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

#ifndef QACQ_GP_HPP
#define QACQ_GP_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "qacq/errors.hpp"
#include "qacq/kernel.hpp"
#include "qacq/linalg.hpp"
#include "qacq/types.hpp"

namespace qacq {

/// Tolerance below which two query rows count as duplicates (unit-cube
/// coordinates); input derivatives are undefined for coincident queries.
inline constexpr double kDuplicateQueryTol = 1e-9;

/// Derivatives of the posterior moments with respect to the first
/// `n_active` query rows.
struct PosteriorJacobians {
  /// dmean(u, c) = d mean_u / d X(u, c).  Each posterior mean component
  /// depends only on its own query row.
  Eigen::MatrixXd dmean;  // n_active x d
  /// dcov[u * d + c](i, j) = d cov(i, j) / d X(u, c); dense q x q slices.
  std::vector<Eigen::MatrixXd> dcov;
};

/// Gaussian process surrogate conditioned on a dataset.  The training-set
/// factorization is computed once at construction and shared by every
/// posterior query, which is what greedy selection loops rely on.
/// Instances are immutable and safe to share across threads.
class GpModel {
 public:
  GpModel(Dataset data, Hyperparams hp)
      : data_(std::move(data)), hp_(std::move(hp)) {
    data_.validate();
    hp_.validate();
    if (hp_.lengthscales.size() != data_.dim) {
      throw ConfigError("GpModel: lengthscale count != data dim");
    }
    const auto n = data_.size();
    if (n > 0) {
      Eigen::MatrixXd train_cov =
          matern52_cross_covariance(data_.inputs, data_.inputs, hp_);
      train_cov.diagonal().array() += hp_.noise_variance;
      auto fac = stable_cholesky(train_cov);
      train_chol_ = std::move(fac.chol);
      train_jitter_ = fac.jitter_used;
      alpha_ = chol_solve(
          train_chol_,
          (data_.outputs.array() - hp_.mean_constant).matrix().eval());
    }
  }

  [[nodiscard]] const Dataset& data() const { return data_; }
  [[nodiscard]] const Hyperparams& hp() const { return hp_; }
  [[nodiscard]] double train_jitter() const { return train_jitter_; }

  /// Posterior moments of the latent function at the query rows of X.
  /// Empty training data recovers the prior.
  [[nodiscard]] MvnMoments moments(const Eigen::MatrixXd& x_query) const {
    check_query(x_query);
    const auto q = x_query.rows();
    MvnMoments mom;
    Eigen::MatrixXd prior_cov =
        matern52_cross_covariance(x_query, x_query, hp_);
    if (data_.empty()) {
      mom.mean = Eigen::VectorXd::Constant(q, hp_.mean_constant);
      mom.cov = std::move(prior_cov);
    } else {
      const Eigen::MatrixXd k_xt =
          matern52_cross_covariance(x_query, data_.inputs, hp_);
      mom.mean =
          Eigen::VectorXd::Constant(q, hp_.mean_constant) + k_xt * alpha_;
      // cov = K_xx - V^T V with V = L^{-1} K_tx.
      const Eigen::MatrixXd v = train_chol_.triangularView<Eigen::Lower>()
                                    .solve(k_xt.transpose());
      mom.cov = prior_cov - v.transpose() * v;
      mom.cov = 0.5 * (mom.cov + mom.cov.transpose()).eval();
    }
    auto fac = stable_cholesky(mom.cov);
    mom.chol = std::move(fac.chol);
    mom.jitter_used = fac.jitter_used;
    return mom;
  }

  /// Posterior mean at a single point.
  [[nodiscard]] double mean_at(const Eigen::VectorXd& x) const {
    if (data_.empty()) return hp_.mean_constant;
    const Eigen::RowVectorXd xr = x.transpose();
    Eigen::VectorXd k(data_.size());
    for (Eigen::Index i = 0; i < data_.size(); ++i) {
      k(i) = matern52_profile(
          scaled_distance(xr, data_.inputs.row(i), hp_.lengthscales),
          hp_.signal_variance);
    }
    return hp_.mean_constant + k.dot(alpha_);
  }

  /// Posterior variance of the latent function at a single point.
  [[nodiscard]] double variance_at(const Eigen::VectorXd& x) const {
    if (data_.empty()) return hp_.signal_variance;
    const Eigen::RowVectorXd xr = x.transpose();
    Eigen::VectorXd k(data_.size());
    for (Eigen::Index i = 0; i < data_.size(); ++i) {
      k(i) = matern52_profile(
          scaled_distance(xr, data_.inputs.row(i), hp_.lengthscales),
          hp_.signal_variance);
    }
    const Eigen::VectorXd v = train_chol_.triangularView<Eigen::Lower>()
                                  .solve(k);
    return std::max(0.0, hp_.signal_variance - v.squaredNorm());
  }

  /// Mean and variance at a single point in one pass.
  [[nodiscard]] std::pair<double, double> mean_variance_at(
      const Eigen::VectorXd& x) const {
    if (data_.empty()) return {hp_.mean_constant, hp_.signal_variance};
    const Eigen::RowVectorXd xr = x.transpose();
    Eigen::VectorXd k(data_.size());
    for (Eigen::Index i = 0; i < data_.size(); ++i) {
      k(i) = matern52_profile(
          scaled_distance(xr, data_.inputs.row(i), hp_.lengthscales),
          hp_.signal_variance);
    }
    const Eigen::VectorXd v = train_chol_.triangularView<Eigen::Lower>()
                                  .solve(k);
    return {hp_.mean_constant + k.dot(alpha_),
            std::max(0.0, hp_.signal_variance - v.squaredNorm())};
  }

  /// Derivatives of moments(x_query) with respect to the first n_active rows
  /// (all rows when n_active < 0).  Rows must be pairwise distinct.
  [[nodiscard]] PosteriorJacobians input_jacobians(
      const Eigen::MatrixXd& x_query, Eigen::Index n_active = -1) const {
    check_query(x_query);
    const auto q = x_query.rows();
    const auto d = x_query.cols();
    if (n_active < 0) n_active = q;
    for (Eigen::Index i = 0; i < q; ++i) {
      for (Eigen::Index j = i + 1; j < q; ++j) {
        if ((x_query.row(i) - x_query.row(j)).norm() < kDuplicateQueryTol) {
          throw DegenerateQueryError(
              "input_jacobians: query rows are not unique");
        }
      }
    }

    PosteriorJacobians jac;
    jac.dmean = Eigen::MatrixXd::Zero(n_active, d);
    jac.dcov.assign(static_cast<std::size_t>(n_active * d),
                    Eigen::MatrixXd::Zero(q, q));

    const auto n = data_.size();
    // b_mat = A^{-1} K_tq; grad_train[u] = d k(x_u, X_train) / d x_u.
    Eigen::MatrixXd b_mat;
    if (n > 0) {
      const Eigen::MatrixXd k_qt =
          matern52_cross_covariance(x_query, data_.inputs, hp_);
      b_mat = chol_solve_mat(train_chol_, k_qt.transpose());  // n x q
    }

    const Eigen::ArrayXd inv_sq_ls = hp_.lengthscales.array().square().inverse();

    for (Eigen::Index u = 0; u < n_active; ++u) {
      // d k(x_u, X_train)/d x_u, one n x d block.
      Eigen::MatrixXd dk_train(n, d);
      for (Eigen::Index t = 0; t < n; ++t) {
        const double r = scaled_distance(x_query.row(u), data_.inputs.row(t),
                                         hp_.lengthscales);
        const double w = matern52_radial_weight(r, hp_.signal_variance);
        dk_train.row(t) =
            w * ((x_query.row(u) - data_.inputs.row(t)).array() *
                 inv_sq_ls.transpose());
      }
      if (n > 0) {
        jac.dmean.row(u) = alpha_.transpose() * dk_train;
      }

      for (Eigen::Index c = 0; c < d; ++c) {
        Eigen::MatrixXd& slice = jac.dcov[static_cast<std::size_t>(u * d + c)];
        for (Eigen::Index j = 0; j < q; ++j) {
          double val = 0.0;
          if (j != u) {
            const double r = scaled_distance(x_query.row(u), x_query.row(j),
                                             hp_.lengthscales);
            const double w = matern52_radial_weight(r, hp_.signal_variance);
            val = w * (x_query(u, c) - x_query(j, c)) * inv_sq_ls(c);
          }
          if (n > 0) {
            val -= dk_train.col(c).dot(b_mat.col(j));
          }
          if (j == u) {
            // Diagonal: k(x,x) is constant, the data term is doubled.
            slice(u, u) = 2.0 * val;
          } else {
            slice(u, j) = val;
            slice(j, u) = val;
          }
        }
      }
    }
    return jac;
  }

  /// Model conditioned on one extra (possibly hypothesized) observation.
  [[nodiscard]] GpModel fantasized(const Eigen::VectorXd& x, double y) const {
    return GpModel(fantasize(data_, x, y), hp_);
  }

 private:
  void check_query(const Eigen::MatrixXd& x_query) const {
    if (x_query.rows() < 1 || x_query.cols() != data_.dim) {
      throw InputError("GpModel: query shape mismatch");
    }
  }

  Dataset data_;
  Hyperparams hp_;
  Eigen::MatrixXd train_chol_;
  Eigen::VectorXd alpha_;
  double train_jitter_ = 0.0;
};

/// Posterior moments as a free function.
inline MvnMoments posterior_moments(const Eigen::MatrixXd& x_query,
                                    const Dataset& data,
                                    const Hyperparams& hp) {
  return GpModel(data, hp).moments(x_query);
}

/// Posterior input derivatives as a free function.
inline PosteriorJacobians posterior_input_jacobians(
    const Eigen::MatrixXd& x_query, const Dataset& data,
    const Hyperparams& hp) {
  return GpModel(data, hp).input_jacobians(x_query);
}

}  // namespace qacq

#endif  // QACQ_GP_HPP
