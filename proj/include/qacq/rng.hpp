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

#ifndef QACQ_RNG_HPP
#define QACQ_RNG_HPP

#include <cmath>
#include <cstdint>

#include "qacq/math.hpp"

namespace qacq {

/// SplitMix64 finalizer: bijective on 64-bit words with full avalanche.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and up to two tags.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return mix64(mix64(mix64(seed) ^ a) ^ b);
}

/// Stateless random stream addressed by (seed, index).  Draws depend only on
/// their address, never on evaluation order, so concurrent consumers see the
/// same variates a sequential run would.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : base_(mix64(seed)) {}

  std::uint64_t word(std::uint64_t index) const {
    return mix64(base_ ^ (index * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL));
  }

  /// Uniform draw in [0, 1).
  double uniform(std::uint64_t index) const {
    return static_cast<double>(word(index) >> 11) * 0x1.0p-53;
  }

  /// Uniform draw in (0, 1]; safe as a log argument.
  double uniform_pos(std::uint64_t index) const {
    return static_cast<double>((word(index) >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; one variate per index.
  double normal(std::uint64_t index) const {
    const double u1 = uniform_pos(2 * index);
    const double u2 = uniform(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t base_;
};

}  // namespace qacq

#endif  // QACQ_RNG_HPP
