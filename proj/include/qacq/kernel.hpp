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

#ifndef QACQ_KERNEL_HPP
#define QACQ_KERNEL_HPP

#include <Eigen/Dense>
#include <cmath>

#include "qacq/errors.hpp"
#include "qacq/math.hpp"
#include "qacq/types.hpp"

namespace qacq {

/// Matern-5/2 profile at lengthscale-scaled distance r:
///   k(r) = s2 * (1 + sqrt(5) r + 5 r^2 / 3) * exp(-sqrt(5) r)
inline double matern52_profile(double r, double s2) {
  return s2 * (1.0 + kSqrt5 * r + 5.0 * r * r / 3.0) * std::exp(-kSqrt5 * r);
}

/// Scalar weight w(r) such that dk/dx1 = w(r) * (x1 - x2) ./ lengthscales^2.
/// The 1/r from dr/dx cancels, so the weight is smooth at r = 0.
inline double matern52_radial_weight(double r, double s2) {
  return -(5.0 / 3.0) * s2 * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
}

/// Lengthscale-scaled distance between two rows.
inline double scaled_distance(const Eigen::RowVectorXd& a,
                              const Eigen::RowVectorXd& b,
                              const Eigen::VectorXd& lengthscales) {
  const Eigen::ArrayXd delta =
      (a - b).transpose().array() / lengthscales.array();
  return std::sqrt(delta.square().sum());
}

/// Cross-covariance K(X1, X2) under the anisotropic Matern-5/2 kernel.
inline Eigen::MatrixXd matern52_cross_covariance(const Eigen::MatrixXd& x1,
                                                 const Eigen::MatrixXd& x2,
                                                 const Hyperparams& hp) {
  hp.validate();
  const auto d = hp.lengthscales.size();
  if (x1.cols() != d || x2.cols() != d) {
    throw InputError("matern52_cross_covariance: column count != d");
  }
  Eigen::MatrixXd out(x1.rows(), x2.rows());
  for (Eigen::Index i = 0; i < x1.rows(); ++i) {
    for (Eigen::Index j = 0; j < x2.rows(); ++j) {
      const double r = scaled_distance(x1.row(i), x2.row(j), hp.lengthscales);
      out(i, j) = matern52_profile(r, hp.signal_variance);
    }
  }
  return out;
}

/// Gradient of k(x, z) with respect to x, for fixed z.
inline Eigen::VectorXd matern52_grad_x(const Eigen::RowVectorXd& x,
                                       const Eigen::RowVectorXd& z,
                                       const Hyperparams& hp) {
  const double r = scaled_distance(x, z, hp.lengthscales);
  const double w = matern52_radial_weight(r, hp.signal_variance);
  return w * ((x - z).transpose().array() /
              hp.lengthscales.array().square())
                 .matrix();
}

}  // namespace qacq

#endif  // QACQ_KERNEL_HPP
