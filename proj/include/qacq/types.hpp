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

#ifndef QACQ_TYPES_HPP
#define QACQ_TYPES_HPP

#include <Eigen/Dense>
#include <utility>

#include "qacq/errors.hpp"

namespace qacq {

/// Observed input/output pairs.  Inputs live on the unit cube [0,1]^d; the
/// harness rescales task domains before anything reaches the surrogate.
struct Dataset {
  Eigen::MatrixXd inputs;   // n x d
  Eigen::VectorXd outputs;  // n
  int dim = 0;

  Dataset() = default;

  explicit Dataset(int d)
      : inputs(0, d), outputs(0), dim(d) {
    if (d < 1) throw InputError("Dataset: dim must be >= 1");
  }

  Dataset(Eigen::MatrixXd in, Eigen::VectorXd out)
      : inputs(std::move(in)), outputs(std::move(out)),
        dim(static_cast<int>(inputs.cols())) {
    validate();
  }

  [[nodiscard]] Eigen::Index size() const { return inputs.rows(); }
  [[nodiscard]] bool empty() const { return inputs.rows() == 0; }

  void validate() const {
    if (dim < 1) throw InputError("Dataset: dim must be >= 1");
    if (inputs.rows() != outputs.size()) {
      throw InputError("Dataset: inputs and outputs row counts differ");
    }
    if (inputs.rows() > 0) {
      constexpr double slack = 1e-12;
      if (inputs.minCoeff() < -slack || inputs.maxCoeff() > 1.0 + slack) {
        throw InputError("Dataset: inputs must lie in the unit cube");
      }
    }
  }
};

/// Returns a copy of `data` extended by one observation; `data` is unchanged.
inline Dataset fantasize(const Dataset& data, const Eigen::VectorXd& x,
                         double y) {
  if (x.size() != data.dim) {
    throw InputError("fantasize: point dimension mismatch");
  }
  if (x.minCoeff() < -1e-12 || x.maxCoeff() > 1.0 + 1e-12) {
    throw InputError("fantasize: point outside the unit cube");
  }
  Dataset out(data.dim);
  const auto n = data.size();
  out.inputs.resize(n + 1, data.dim);
  out.outputs.resize(n + 1);
  if (n > 0) {
    out.inputs.topRows(n) = data.inputs;
    out.outputs.head(n) = data.outputs;
  }
  out.inputs.row(n) = x.transpose();
  out.outputs(n) = y;
  return out;
}

/// Surrogate hyperparameters: anisotropic lengthscales plus signal variance,
/// observation-noise variance and a constant mean.
struct Hyperparams {
  Eigen::VectorXd lengthscales;  // d, strictly positive
  double signal_variance = 1.0;
  double noise_variance = 0.0;
  double mean_constant = 0.0;

  void validate() const {
    if (lengthscales.size() < 1 || (lengthscales.array() <= 0.0).any()) {
      throw ConfigError("Hyperparams: lengthscales must be strictly positive");
    }
    if (!(signal_variance > 0.0)) {
      throw ConfigError("Hyperparams: signal_variance must be positive");
    }
    if (noise_variance < 0.0) {
      throw ConfigError("Hyperparams: noise_variance must be non-negative");
    }
  }

  static Hyperparams isotropic(int d, double lengthscale,
                               double signal_variance, double noise_variance,
                               double mean_constant = 0.0) {
    Hyperparams hp;
    hp.lengthscales = Eigen::VectorXd::Constant(d, lengthscale);
    hp.signal_variance = signal_variance;
    hp.noise_variance = noise_variance;
    hp.mean_constant = mean_constant;
    hp.validate();
    return hp;
  }
};

/// Multivariate normal belief over the outcomes at a query set, with the
/// Cholesky factor of the covariance and the jitter spent obtaining it.
struct MvnMoments {
  Eigen::VectorXd mean;  // q
  Eigen::MatrixXd cov;   // q x q, symmetric
  Eigen::MatrixXd chol;  // q x q, lower triangular, L L^T = cov + jitter I
  double jitter_used = 0.0;

  [[nodiscard]] Eigen::Index size() const { return mean.size(); }
};

}  // namespace qacq

#endif  // QACQ_TYPES_HPP
