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

#ifndef QACQ_MATH_HPP
#define QACQ_MATH_HPP

#include <cmath>

namespace qacq {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt5 = 2.23606797749978969641;

/// Standard normal density.
inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

/// Standard normal CDF via the complementary error function.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

inline double sigmoid(double u) {
  // Split on sign so the exp argument is always non-positive.
  if (u >= 0.0) {
    return 1.0 / (1.0 + std::exp(-u));
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

inline double relu(double u) { return u > 0.0 ? u : 0.0; }

}  // namespace qacq

#endif  // QACQ_MATH_HPP
