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

#ifndef QACQ_TASKS_HPP
#define QACQ_TASKS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qacq/benchmark_data.hpp"
#include "qacq/errors.hpp"
#include "qacq/lowdisc.hpp"
#include "qacq/math.hpp"
#include "qacq/rng.hpp"

namespace qacq {

/// Synthetic objective: an approximate draw from a known Matern-5/2 prior
/// via weighted random Fourier basis functions.  Deterministic to evaluate;
/// the estimated maximum makes regret well defined.
struct SyntheticTask {
  Eigen::MatrixXd frequencies;  // n_basis x d
  Eigen::VectorXd phases;       // n_basis
  Eigen::VectorXd weights;      // n_basis
  double amplitude = 1.0;
  int dim = 0;
  double true_max = 0.0;
  Eigen::VectorXd argmax_estimate;
  std::uint64_t seed = 0;

  [[nodiscard]] int n_basis() const {
    return static_cast<int>(frequencies.rows());
  }
};

inline void check_unit_cube(const Eigen::VectorXd& x, int dim,
                            const char* who) {
  if (x.size() != dim) throw InputError(std::string(who) + ": dimension");
  if (x.minCoeff() < -1e-9 || x.maxCoeff() > 1.0 + 1e-9) {
    throw InputError(std::string(who) + ": point outside the unit cube");
  }
}

/// f(x) = amplitude * sqrt(2/n) * sum_j w_j cos(omega_j . x + b_j).
inline double evaluate_task(const SyntheticTask& task,
                            const Eigen::VectorXd& x) {
  check_unit_cube(x, task.dim, "evaluate_task");
  const Eigen::VectorXd phase = task.frequencies * x + task.phases;
  const double scale =
      task.amplitude * std::sqrt(2.0 / static_cast<double>(task.n_basis()));
  return scale * phase.array().cos().matrix().dot(task.weights);
}

/// Batch evaluation, one row of `x` per point.
inline Eigen::VectorXd evaluate_task_batch(const SyntheticTask& task,
                                           const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd phase =
      (x * task.frequencies.transpose()).rowwise() +
      task.phases.transpose();
  const double scale =
      task.amplitude * std::sqrt(2.0 / static_cast<double>(task.n_basis()));
  return scale * (phase.array().cos().matrix() * task.weights);
}

inline Eigen::VectorXd task_gradient(const SyntheticTask& task,
                                     const Eigen::VectorXd& x) {
  const Eigen::VectorXd phase = task.frequencies * x + task.phases;
  const double scale =
      task.amplitude * std::sqrt(2.0 / static_cast<double>(task.n_basis()));
  const Eigen::ArrayXd s = phase.array().sin();
  return -scale * (task.frequencies.transpose() *
                   (s * task.weights.array()).matrix());
}

/// Controls for the recorded-maximum search: a dense probe sweep followed
/// by projected gradient ascent from the most promising probes.
struct TrueMaxConfig {
  int probes = 4096;
  int refine_starts = 64;
  int refine_steps = 100;
  double step_size = 0.02;
};

namespace detail {

inline void estimate_true_max(SyntheticTask& task, const TrueMaxConfig& cfg) {
  const int d = task.dim;
  Eigen::MatrixXd probes =
      low_discrepancy_points(cfg.probes, d, derive_seed(task.seed, 0x7A5));
  Eigen::VectorXd values = evaluate_task_batch(task, probes);

  double best = values.maxCoeff();
  Eigen::VectorXd best_x;
  {
    Eigen::Index idx = 0;
    values.maxCoeff(&idx);
    best_x = probes.row(idx).transpose();
  }

  // Refine the top probes with batched projected gradient ascent; all
  // starts advance together so every step is one pair of matrix products.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(probes.rows()));
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<Eigen::Index>(i);
  const int refine =
      std::min<int>(cfg.refine_starts, static_cast<int>(order.size()));
  std::partial_sort(order.begin(), order.begin() + refine, order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return values(a) > values(b);
                    });

  if (refine > 0 && cfg.refine_steps > 0) {
    Eigen::MatrixXd x(refine, d);
    for (int s = 0; s < refine; ++s) {
      x.row(s) = probes.row(order[static_cast<std::size_t>(s)]);
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(refine, d);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(refine, d);
    double b1t = 1.0, b2t = 1.0;
    const double scale =
        task.amplitude * std::sqrt(2.0 / static_cast<double>(task.n_basis()));
    for (int it = 0; it < cfg.refine_steps; ++it) {
      const Eigen::MatrixXd phase =
          (x * task.frequencies.transpose()).rowwise() +
          task.phases.transpose();
      const Eigen::VectorXd fx =
          scale * (phase.array().cos().matrix() * task.weights);
      for (int s = 0; s < refine; ++s) {
        if (fx(s) > best) {
          best = fx(s);
          best_x = x.row(s).transpose();
        }
      }
      const Eigen::MatrixXd grad =
          -scale * ((phase.array().sin().rowwise() *
                     task.weights.transpose().array())
                        .matrix() *
                    task.frequencies);
      m = 0.9 * m + 0.1 * grad;
      v = 0.999 * v.array() + 0.001 * grad.array().square();
      b1t *= 0.9;
      b2t *= 0.999;
      x.array() += cfg.step_size * (m.array() / (1.0 - b1t)) /
                   ((v.array() / (1.0 - b2t)).sqrt() + 1e-8);
      x = x.cwiseMax(0.0).cwiseMin(1.0);
    }
    const Eigen::VectorXd final_vals = evaluate_task_batch(task, x);
    for (int s = 0; s < refine; ++s) {
      if (final_vals(s) > best) {
        best = final_vals(s);
        best_x = x.row(s).transpose();
      }
    }
  }
  task.true_max = best;
  task.argmax_estimate = best_x;
}

}  // namespace detail

/// Approximate draw from the Matern-5/2 prior with Lambda = (d/16) I:
/// frequencies from the multivariate t with 5 degrees of freedom and scale
/// (16/d) I (Gaussian draw scaled by sqrt(nu/chi^2_nu)), uniform phases,
/// normal weights.
inline SyntheticTask sample_matern_task(int d, int n_basis,
                                        std::uint64_t seed,
                                        const TrueMaxConfig& max_cfg = {},
                                        bool gaussian_spectrum = false) {
  if (d < 1 || n_basis < 1) throw InputError("sample_matern_task: d, n >= 1");
  SyntheticTask task;
  task.dim = d;
  task.seed = seed;
  task.frequencies.resize(n_basis, d);
  task.phases.resize(n_basis);
  task.weights.resize(n_basis);

  const CounterRng rng(derive_seed(seed, 0x7A51ULL));
  const double g_scale = std::sqrt(16.0 / static_cast<double>(d));
  constexpr double kNu = 5.0;
  std::uint64_t idx = 0;
  for (int j = 0; j < n_basis; ++j) {
    double chi2 = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double n = rng.normal(idx++);
      chi2 += n * n;
    }
    const double t_scale =
        gaussian_spectrum ? 1.0 : std::sqrt(kNu / chi2);
    for (int c = 0; c < d; ++c) {
      task.frequencies(j, c) = g_scale * rng.normal(idx++) * t_scale;
    }
    task.phases(j) = 2.0 * kPi * rng.uniform(idx++);
    task.weights(j) = rng.normal(idx++);
  }

  detail::estimate_true_max(task, max_cfg);
  return task;
}

/// Gaussian observation channel with a deterministic stream: draw i is
/// fully determined by (seed, i).
struct ObservationChannel {
  double noise_variance = 1e-3;
  std::uint64_t seed = 0;
  std::uint64_t next_index = 0;

  double observe_value(double fx) {
    if (noise_variance < 0.0) {
      throw ConfigError("ObservationChannel: negative noise variance");
    }
    if (noise_variance == 0.0) {
      ++next_index;
      return fx;
    }
    const CounterRng rng(derive_seed(seed, 0x0B5ULL));
    return fx + std::sqrt(noise_variance) * rng.normal(next_index++);
  }
};

inline double observe(const SyntheticTask& task, const Eigen::VectorXd& x,
                      ObservationChannel& channel) {
  return channel.observe_value(evaluate_task(task, x));
}

// ---------------------------------------------------------------------------
// Standard benchmarks on the unit cube, sign-flipped to maximizations.
// ---------------------------------------------------------------------------

enum class BenchmarkName { branin, hartmann3, hartmann6, levy };

inline BenchmarkName benchmark_from_string(const std::string& name) {
  if (name == "branin") return BenchmarkName::branin;
  if (name == "hartmann3") return BenchmarkName::hartmann3;
  if (name == "hartmann6") return BenchmarkName::hartmann6;
  if (name == "levy") return BenchmarkName::levy;
  throw ConfigError("unknown benchmark: " + name);
}

inline std::string to_string(BenchmarkName name) {
  switch (name) {
    case BenchmarkName::branin: return "branin";
    case BenchmarkName::hartmann3: return "hartmann3";
    case BenchmarkName::hartmann6: return "hartmann6";
    case BenchmarkName::levy: return "levy";
  }
  return "?";
}

/// Canonical dimension; levy takes any d >= 1 (callers pass their choice).
inline int benchmark_dim(BenchmarkName name, int levy_dim = 4) {
  switch (name) {
    case BenchmarkName::branin: return 2;
    case BenchmarkName::hartmann3: return 3;
    case BenchmarkName::hartmann6: return 6;
    case BenchmarkName::levy: return levy_dim;
  }
  return 0;
}

namespace detail {

inline double branin_native(double x1, double x2) {
  namespace bd = benchmark_data;
  const double inner = x2 - bd::kBraninB * x1 * x1 + bd::kBraninC * x1 -
                       bd::kBraninR;
  return bd::kBraninA * inner * inner +
         bd::kBraninS * (1.0 - bd::kBraninT) * std::cos(x1) + bd::kBraninS;
}

template <int D>
double hartmann_native(const double (&a)[4][D], const double (&p)[4][D],
                       const Eigen::VectorXd& x) {
  double outer = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < D; ++j) {
      const double diff = x(j) - p[i][j];
      inner += a[i][j] * diff * diff;
    }
    outer += benchmark_data::kHartmannC[i] * std::exp(-inner);
  }
  return -outer;
}

inline double levy_native(const Eigen::VectorXd& x) {
  const auto d = x.size();
  const auto w = [&](Eigen::Index i) { return 1.0 + (x(i) - 1.0) / 4.0; };
  const double s1 = std::sin(kPi * w(0));
  double val = s1 * s1;
  for (Eigen::Index i = 0; i + 1 < d; ++i) {
    const double wi = w(i);
    const double s = std::sin(kPi * wi + 1.0);
    val += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * s * s);
  }
  const double wd = w(d - 1);
  const double sd = std::sin(2.0 * kPi * wd);
  val += (wd - 1.0) * (wd - 1.0) * (1.0 + sd * sd);
  return val;
}

}  // namespace detail

/// Benchmark value at a unit-cube point, sign-flipped so every task is a
/// maximization.
inline double benchmark_value(BenchmarkName name, const Eigen::VectorXd& x) {
  switch (name) {
    case BenchmarkName::branin: {
      check_unit_cube(x, 2, "benchmark");
      const double x1 = -5.0 + 15.0 * x(0);
      const double x2 = 15.0 * x(1);
      return -detail::branin_native(x1, x2);
    }
    case BenchmarkName::hartmann3:
      check_unit_cube(x, 3, "benchmark");
      return -detail::hartmann_native(benchmark_data::kHartmann3A,
                                      benchmark_data::kHartmann3P, x);
    case BenchmarkName::hartmann6:
      check_unit_cube(x, 6, "benchmark");
      return -detail::hartmann_native(benchmark_data::kHartmann6A,
                                      benchmark_data::kHartmann6P, x);
    case BenchmarkName::levy: {
      check_unit_cube(x, static_cast<int>(x.size()), "benchmark");
      const Eigen::VectorXd native =
          benchmark_data::kLevyLo +
          (benchmark_data::kLevyHi - benchmark_data::kLevyLo) * x.array();
      return -detail::levy_native(native);
    }
  }
  throw ConfigError("benchmark_value: unknown benchmark");
}

/// Maximum of the sign-flipped benchmark (published optima).
inline double benchmark_optimum(BenchmarkName name) {
  switch (name) {
    case BenchmarkName::branin: return -benchmark_data::kBraninMin;
    case BenchmarkName::hartmann3: return -benchmark_data::kHartmann3Min;
    case BenchmarkName::hartmann6: return -benchmark_data::kHartmann6Min;
    case BenchmarkName::levy: return 0.0;
  }
  throw ConfigError("benchmark_optimum: unknown benchmark");
}

inline double observe(BenchmarkName name, const Eigen::VectorXd& x,
                      ObservationChannel& channel) {
  return channel.observe_value(benchmark_value(name, x));
}

}  // namespace qacq

#endif  // QACQ_TASKS_HPP
