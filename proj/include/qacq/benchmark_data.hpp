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

// Canonical benchmark constants, kept in one auditable place.  Values are
// the standard ones from the global-optimization literature.

#ifndef QACQ_BENCHMARK_DATA_HPP
#define QACQ_BENCHMARK_DATA_HPP

namespace qacq::benchmark_data {

// Branin-Hoo on [-5, 10] x [0, 15]; three global minima of value
// 0.39788735772973816 at (-pi, 12.275), (pi, 2.275), (9.42478, 2.475).
inline constexpr double kBraninA = 1.0;
inline constexpr double kBraninB = 5.1 / (4.0 * 3.14159265358979323846 *
                                          3.14159265358979323846);
inline constexpr double kBraninC = 5.0 / 3.14159265358979323846;
inline constexpr double kBraninR = 6.0;
inline constexpr double kBraninS = 10.0;
inline constexpr double kBraninT = 1.0 / (8.0 * 3.14159265358979323846);
inline constexpr double kBraninMin = 0.39788735772973816;

// Hartmann family, shared outer weights.
inline constexpr double kHartmannC[4] = {1.0, 1.2, 3.0, 3.2};

// Hartmann-3 on [0, 1]^3; global minimum -3.86278214782076 at
// (0.114614, 0.555649, 0.852547).
inline constexpr double kHartmann3A[4][3] = {
    {3.0, 10.0, 30.0},
    {0.1, 10.0, 35.0},
    {3.0, 10.0, 30.0},
    {0.1, 10.0, 35.0},
};
inline constexpr double kHartmann3P[4][3] = {
    {0.3689, 0.1170, 0.2673},
    {0.4699, 0.4387, 0.7470},
    {0.1091, 0.8732, 0.5547},
    {0.0381, 0.5743, 0.8828},
};
inline constexpr double kHartmann3Min = -3.86278214782076;

// Hartmann-6 on [0, 1]^6; global minimum -3.32236801141551 at
// (0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573).
inline constexpr double kHartmann6A[4][6] = {
    {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
};
inline constexpr double kHartmann6P[4][6] = {
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381},
};
inline constexpr double kHartmann6Min = -3.32236801141551;

// Levy on [-10, 10]^d; global minimum 0 at the all-ones point.
inline constexpr double kLevyLo = -10.0;
inline constexpr double kLevyHi = 10.0;

}  // namespace qacq::benchmark_data

#endif  // QACQ_BENCHMARK_DATA_HPP
