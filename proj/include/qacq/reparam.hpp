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

#ifndef QACQ_REPARAM_HPP
#define QACQ_REPARAM_HPP

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>

#include "qacq/errors.hpp"
#include "qacq/rng.hpp"

namespace qacq {

enum class BaseMode { deterministic, stochastic };

/// Standard normal base variates z ~ N(0, I), shape m x q.  Deterministic
/// mode reproduces the same tensor for identical (seed, m, q); stochastic
/// mode salts the seed with a process-wide counter.
struct BaseSamples {
  Eigen::MatrixXd z;  // m x q
  BaseMode mode = BaseMode::deterministic;
  std::uint64_t seed = 0;

  [[nodiscard]] Eigen::Index m() const { return z.rows(); }
  [[nodiscard]] Eigen::Index q() const { return z.cols(); }
};

namespace detail {
inline std::uint64_t next_stochastic_salt() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace detail

inline BaseSamples draw_base_samples(int m, int q, BaseMode mode,
                                     std::uint64_t seed) {
  if (m < 1 || q < 1) {
    throw InputError("draw_base_samples: m and q must be >= 1");
  }
  std::uint64_t effective = seed;
  if (mode == BaseMode::stochastic) {
    effective = derive_seed(seed, detail::next_stochastic_salt());
  }
  const CounterRng rng(effective);
  BaseSamples out;
  out.mode = mode;
  out.seed = effective;
  out.z.resize(m, q);
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < q; ++j) {
      out.z(k, j) = rng.normal(static_cast<std::uint64_t>(k) * q + j);
    }
  }
  return out;
}

/// Reparameterized outcomes y = mu + L z, one sample per row.
struct SamplePaths {
  Eigen::MatrixXd y;  // m x q
};

inline SamplePaths reparameterize(const Eigen::VectorXd& mu,
                                  const Eigen::MatrixXd& chol,
                                  const BaseSamples& z) {
  const auto q = mu.size();
  if (chol.rows() != q || chol.cols() != q || z.q() != q) {
    throw InputError("reparameterize: shape mismatch");
  }
  if (q > 1) {
    const Eigen::MatrixXd upper =
        chol.triangularView<Eigen::StrictlyUpper>().toDenseMatrix();
    if (upper.cwiseAbs().maxCoeff() > 0.0) {
      throw InputError("reparameterize: chol must be lower triangular");
    }
  }
  SamplePaths out;
  out.y = (z.z * chol.transpose()).rowwise() + mu.transpose();
  return out;
}

}  // namespace qacq

#endif  // QACQ_REPARAM_HPP
