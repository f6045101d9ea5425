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

#ifndef QACQ_LOWDISC_HPP
#define QACQ_LOWDISC_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "qacq/errors.hpp"
#include "qacq/rng.hpp"

namespace qacq {

namespace detail {
inline constexpr int kLowDiscPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                         23, 29, 31, 37, 41, 43, 47, 53};

/// Radical-inverse of `index` in base `base`.
inline double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base;
  double scale = inv;
  double value = 0.0;
  while (index > 0) {
    value += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv;
  }
  return value;
}
}  // namespace detail

/// n low-discrepancy points on the unit cube (Halton sequence with a seeded
/// Cranley-Patterson rotation).  Used for acquisition discretizations and
/// the oracle grids; avoids axis-aligned degeneracies of lattice grids.
inline Eigen::MatrixXd low_discrepancy_points(int n, int d,
                                              std::uint64_t seed = 0) {
  if (n < 1 || d < 1) throw InputError("low_discrepancy_points: n, d >= 1");
  if (d > 16) throw InputError("low_discrepancy_points: d > 16 unsupported");
  const CounterRng rng(derive_seed(seed, 0x10DULL));
  Eigen::VectorXd shift(d);
  for (int j = 0; j < d; ++j) shift(j) = rng.uniform(j);

  Eigen::MatrixXd out(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      double v = detail::radical_inverse(static_cast<std::uint64_t>(i) + 1,
                                         detail::kLowDiscPrimes[j]) +
                 shift(j);
      if (v >= 1.0) v -= 1.0;
      out(i, j) = v;
    }
  }
  return out;
}

}  // namespace qacq

#endif  // QACQ_LOWDISC_HPP
