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

#ifndef QACQ_TASK_JSON_HPP
#define QACQ_TASK_JSON_HPP

#include <json.hpp>

#include "qacq/errors.hpp"
#include "qacq/tasks.hpp"

namespace qacq {

/// Serializes a synthetic task so a run can be reproduced exactly.
/// Schema: {"dim", "n_basis", "seed", "amplitude", "frequencies" (row-major
/// n_basis x dim), "phases", "weights", "true_max", "argmax_estimate"}.
inline nlohmann::json task_to_json(const SyntheticTask& task) {
  nlohmann::json j;
  j["dim"] = task.dim;
  j["n_basis"] = task.n_basis();
  j["seed"] = task.seed;
  j["amplitude"] = task.amplitude;
  std::vector<double> freq(static_cast<std::size_t>(task.frequencies.size()));
  for (int r = 0; r < task.frequencies.rows(); ++r) {
    for (int c = 0; c < task.frequencies.cols(); ++c) {
      freq[static_cast<std::size_t>(r * task.dim + c)] =
          task.frequencies(r, c);
    }
  }
  j["frequencies"] = freq;
  j["phases"] = std::vector<double>(task.phases.data(),
                                    task.phases.data() + task.phases.size());
  j["weights"] = std::vector<double>(
      task.weights.data(), task.weights.data() + task.weights.size());
  j["true_max"] = task.true_max;
  j["argmax_estimate"] = std::vector<double>(
      task.argmax_estimate.data(),
      task.argmax_estimate.data() + task.argmax_estimate.size());
  return j;
}

inline SyntheticTask task_from_json(const nlohmann::json& j) {
  SyntheticTask task;
  task.dim = j.at("dim").get<int>();
  const int n = j.at("n_basis").get<int>();
  task.seed = j.at("seed").get<std::uint64_t>();
  task.amplitude = j.at("amplitude").get<double>();
  const auto freq = j.at("frequencies").get<std::vector<double>>();
  if (static_cast<int>(freq.size()) != n * task.dim) {
    throw InputError("task_from_json: frequency size mismatch");
  }
  task.frequencies.resize(n, task.dim);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < task.dim; ++c) {
      task.frequencies(r, c) = freq[static_cast<std::size_t>(r * task.dim + c)];
    }
  }
  const auto phases = j.at("phases").get<std::vector<double>>();
  const auto weights = j.at("weights").get<std::vector<double>>();
  if (static_cast<int>(phases.size()) != n ||
      static_cast<int>(weights.size()) != n) {
    throw InputError("task_from_json: vector size mismatch");
  }
  task.phases = Eigen::Map<const Eigen::VectorXd>(phases.data(), n);
  task.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), n);
  task.true_max = j.at("true_max").get<double>();
  const auto argmax = j.at("argmax_estimate").get<std::vector<double>>();
  task.argmax_estimate = Eigen::Map<const Eigen::VectorXd>(
      argmax.data(), static_cast<Eigen::Index>(argmax.size()));
  return task;
}

}  // namespace qacq

#endif  // QACQ_TASK_JSON_HPP
