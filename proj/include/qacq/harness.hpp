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

#ifndef QACQ_HARNESS_HPP
#define QACQ_HARNESS_HPP

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qacq/acquisitions.hpp"
#include "qacq/gp.hpp"
#include "qacq/gp_fit.hpp"
#include "qacq/lowdisc.hpp"
#include "qacq/maximizers.hpp"
#include "qacq/tasks.hpp"

namespace qacq {

inline constexpr const char* kVersion = "0.1.0";

enum class ParallelMode { greedy, joint, incremental };
enum class SurrogateMode { known_prior, map_fit };
enum class AlphaMode { best_observed, fixed };

struct TaskSpec {
  std::string type = "synthetic";  // "synthetic" | "benchmark"
  std::string benchmark;           // set when type == "benchmark"
  int dim = 2;
  int n_basis = 1 << 14;
  double noise_variance = 1e-3;
  TrueMaxConfig true_max;
};

struct RunConfig {
  TaskSpec task;
  int q = 1;
  AcquisitionSpec acq;
  AlphaMode alpha_mode = AlphaMode::best_observed;
  int discretization_size = 128;
  MaximizerConfig maximizer;
  ParallelMode parallel_mode = ParallelMode::greedy;
  int n_fantasies = 16;
  SurrogateMode surrogate = SurrogateMode::known_prior;
  FitConfig fit;
  int fit_restarts = 8;
  int n_initial = 3;
  int n_iterations = 16;
  int n_trials = 32;
  double inner_budget = 4096;
  BudgetMode budget_mode = BudgetMode::evaluations;
  long long total_eval_budget = 0;  // 0 disables the outer evaluation cap
  std::uint64_t seed = 0;
  std::string out = "results.csv";

  void validate() const {
    if (task.type != "synthetic" && task.type != "benchmark") {
      throw ConfigError("RunConfig: task.type must be synthetic|benchmark");
    }
    if (task.type == "benchmark" && surrogate == SurrogateMode::known_prior) {
      throw ConfigError("RunConfig: benchmarks require surrogate map_fit");
    }
    if (task.dim < 1) throw ConfigError("RunConfig: dim >= 1");
    if (q < 1) throw ConfigError("RunConfig: q >= 1");
    if (n_initial < 1) throw ConfigError("RunConfig: n_initial >= 1");
    if (n_iterations < 0) throw ConfigError("RunConfig: n_iterations >= 0");
    if (n_trials < 1) throw ConfigError("RunConfig: n_trials >= 1");
    if (!(inner_budget > 0)) throw ConfigError("RunConfig: inner_budget > 0");
  }
};

struct TrialRow {
  int iteration = 0;
  double wall_time_s = 0.0;
  double best_observed = 0.0;
  double log10_regret = 0.0;
  double acq_value = 0.0;
};

struct TrialRecord {
  int trial = 0;
  std::vector<TrialRow> rows;
  std::uint64_t seed = 0;
  std::string config_hash;
  bool aborted = false;
  std::string abort_reason;
};

// ---------------------------------------------------------------------------
// Config (de)serialization with unknown-key rejection.
// ---------------------------------------------------------------------------

namespace harness_detail {

inline void reject_unknown(const nlohmann::json& j,
                           const std::vector<std::string>& allowed,
                           const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) ==
        allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace harness_detail

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json task{{"type", cfg.task.type},
                      {"dim", cfg.task.dim},
                      {"n_basis", cfg.task.n_basis},
                      {"noise_variance", cfg.task.noise_variance},
                      {"true_max_probes", cfg.task.true_max.probes},
                      {"true_max_refine_starts", cfg.task.true_max.refine_starts},
                      {"true_max_refine_steps", cfg.task.true_max.refine_steps}};
  if (!cfg.task.benchmark.empty()) task["benchmark"] = cfg.task.benchmark;

  nlohmann::json acq{{"kind", to_string(cfg.acq.kind)},
                     {"alpha_mode", cfg.alpha_mode == AlphaMode::best_observed
                                        ? "best_observed"
                                        : "fixed"},
                     {"alpha", cfg.acq.alpha},
                     {"beta", cfg.acq.beta},
                     {"tau", cfg.acq.tau},
                     {"mc_samples", cfg.acq.mc_samples},
                     {"inner_mc_samples", cfg.acq.inner_mc_samples},
                     {"discretization_size", cfg.discretization_size}};

  nlohmann::json maximizer{
      {"kind",
       cfg.maximizer.kind == MaximizerKind::grad_ascent ? "grad" : "rs"},
      {"n_starts", cfg.maximizer.n_starts},
      {"step_size", cfg.maximizer.step_size},
      {"minibatch", cfg.maximizer.minibatch},
      {"rs_batch", cfg.maximizer.rs_batch},
      {"pending_fantasy", cfg.maximizer.pending_fantasy}};

  nlohmann::json fit{{"restarts", cfg.fit_restarts},
                     {"iterations", cfg.fit.iterations},
                     {"step_size", cfg.fit.step_size},
                     {"noise_floor", cfg.fit.noise_floor}};

  const char* mode = cfg.parallel_mode == ParallelMode::greedy   ? "greedy"
                     : cfg.parallel_mode == ParallelMode::joint ? "joint"
                                                                : "incremental";
  return nlohmann::json{
      {"task", task},
      {"q", cfg.q},
      {"acquisition", acq},
      {"maximizer", maximizer},
      {"parallel_mode", mode},
      {"n_fantasies", cfg.n_fantasies},
      {"surrogate", cfg.surrogate == SurrogateMode::known_prior ? "known_prior"
                                                                : "map_fit"},
      {"fit", fit},
      {"n_initial", cfg.n_initial},
      {"n_iterations", cfg.n_iterations},
      {"n_trials", cfg.n_trials},
      {"inner_budget", cfg.inner_budget},
      {"budget_mode",
       cfg.budget_mode == BudgetMode::evaluations ? "evals" : "seconds"},
      {"total_eval_budget", cfg.total_eval_budget},
      {"seed", cfg.seed},
      {"out", cfg.out}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  using harness_detail::reject_unknown;
  RunConfig cfg;
  reject_unknown(j, {"task", "q", "acquisition", "maximizer", "parallel_mode",
                     "n_fantasies", "surrogate", "fit", "n_initial",
                     "n_iterations", "n_trials", "inner_budget", "budget_mode",
                     "total_eval_budget", "seed", "out"},
                 "config");

  if (j.contains("task")) {
    const auto& t = j.at("task");
    reject_unknown(t,
                   {"type", "benchmark", "dim", "n_basis", "noise_variance",
                    "true_max_probes", "true_max_refine_starts",
                    "true_max_refine_steps"},
                   "config.task");
    cfg.task.type = t.value("type", cfg.task.type);
    cfg.task.benchmark = t.value("benchmark", cfg.task.benchmark);
    cfg.task.dim = t.value("dim", cfg.task.dim);
    cfg.task.n_basis = t.value("n_basis", cfg.task.n_basis);
    cfg.task.noise_variance =
        t.value("noise_variance", cfg.task.noise_variance);
    cfg.task.true_max.probes =
        t.value("true_max_probes", cfg.task.true_max.probes);
    cfg.task.true_max.refine_starts =
        t.value("true_max_refine_starts", cfg.task.true_max.refine_starts);
    cfg.task.true_max.refine_steps =
        t.value("true_max_refine_steps", cfg.task.true_max.refine_steps);
  }
  cfg.q = j.value("q", cfg.q);
  if (j.contains("acquisition")) {
    const auto& a = j.at("acquisition");
    reject_unknown(a,
                   {"kind", "alpha_mode", "alpha", "beta", "tau", "mc_samples",
                    "inner_mc_samples", "discretization_size"},
                   "config.acquisition");
    cfg.acq.kind = acq_kind_from_string(
        a.value("kind", to_string(cfg.acq.kind)));
    const std::string alpha_mode = a.value("alpha_mode", "best_observed");
    if (alpha_mode == "best_observed") {
      cfg.alpha_mode = AlphaMode::best_observed;
    } else if (alpha_mode == "fixed") {
      cfg.alpha_mode = AlphaMode::fixed;
    } else {
      throw ConfigError("alpha_mode must be best_observed|fixed");
    }
    cfg.acq.alpha = a.value("alpha", cfg.acq.alpha);
    cfg.acq.beta = a.value("beta", cfg.acq.beta);
    cfg.acq.tau = a.value("tau", cfg.acq.tau);
    cfg.acq.mc_samples = a.value("mc_samples", cfg.acq.mc_samples);
    cfg.acq.inner_mc_samples =
        a.value("inner_mc_samples", cfg.acq.inner_mc_samples);
    cfg.discretization_size =
        a.value("discretization_size", cfg.discretization_size);
  }
  if (j.contains("maximizer")) {
    const auto& m = j.at("maximizer");
    reject_unknown(m,
                   {"kind", "n_starts", "step_size", "minibatch", "rs_batch",
                    "pending_fantasy"},
                   "config.maximizer");
    const std::string kind = m.value("kind", "grad");
    if (kind == "grad") {
      cfg.maximizer.kind = MaximizerKind::grad_ascent;
    } else if (kind == "rs") {
      cfg.maximizer.kind = MaximizerKind::random_search;
    } else {
      throw ConfigError("maximizer.kind must be grad|rs");
    }
    cfg.maximizer.n_starts = m.value("n_starts", cfg.maximizer.n_starts);
    cfg.maximizer.step_size = m.value("step_size", cfg.maximizer.step_size);
    cfg.maximizer.minibatch = m.value("minibatch", cfg.maximizer.minibatch);
    cfg.maximizer.rs_batch = m.value("rs_batch", cfg.maximizer.rs_batch);
    cfg.maximizer.pending_fantasy =
        m.value("pending_fantasy", cfg.maximizer.pending_fantasy);
  }
  if (j.contains("parallel_mode")) {
    const std::string mode = j.at("parallel_mode").get<std::string>();
    if (mode == "greedy") {
      cfg.parallel_mode = ParallelMode::greedy;
    } else if (mode == "joint") {
      cfg.parallel_mode = ParallelMode::joint;
    } else if (mode == "incremental") {
      cfg.parallel_mode = ParallelMode::incremental;
    } else {
      throw ConfigError("parallel_mode must be greedy|joint|incremental");
    }
  }
  cfg.n_fantasies = j.value("n_fantasies", cfg.n_fantasies);
  if (j.contains("surrogate")) {
    const std::string mode = j.at("surrogate").get<std::string>();
    if (mode == "known_prior") {
      cfg.surrogate = SurrogateMode::known_prior;
    } else if (mode == "map_fit") {
      cfg.surrogate = SurrogateMode::map_fit;
    } else {
      throw ConfigError("surrogate must be known_prior|map_fit");
    }
  }
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    reject_unknown(f, {"restarts", "iterations", "step_size", "noise_floor"},
                   "config.fit");
    cfg.fit_restarts = f.value("restarts", cfg.fit_restarts);
    cfg.fit.iterations = f.value("iterations", cfg.fit.iterations);
    cfg.fit.step_size = f.value("step_size", cfg.fit.step_size);
    cfg.fit.noise_floor = f.value("noise_floor", cfg.fit.noise_floor);
  }
  cfg.n_initial = j.value("n_initial", cfg.n_initial);
  cfg.n_iterations = j.value("n_iterations", cfg.n_iterations);
  cfg.n_trials = j.value("n_trials", cfg.n_trials);
  cfg.inner_budget = j.value("inner_budget", cfg.inner_budget);
  if (j.contains("budget_mode")) {
    const std::string mode = j.at("budget_mode").get<std::string>();
    if (mode == "evals") {
      cfg.budget_mode = BudgetMode::evaluations;
    } else if (mode == "seconds") {
      cfg.budget_mode = BudgetMode::seconds;
    } else {
      throw ConfigError("budget_mode must be evals|seconds");
    }
  }
  cfg.total_eval_budget = j.value("total_eval_budget", cfg.total_eval_budget);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out = j.value("out", cfg.out);
  cfg.validate();
  return cfg;
}

inline std::string config_hash(const RunConfig& cfg) {
  nlohmann::json j = run_config_to_json(cfg);
  j.erase("out");  // output location is plumbing, not part of the run
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    harness_detail::fnv1a(j.dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Inner-budget calibration.
// ---------------------------------------------------------------------------

/// Evaluation-count mode passes N through; timed mode returns the median of
/// three repetitions of evaluating N acquisition values under the current
/// model state.
inline double calibrate_inner_budget(long long n, const GpModel& model,
                                     const AcquisitionSpec& spec, int q,
                                     BudgetMode mode,
                                     std::uint64_t seed = 0) {
  if (mode == BudgetMode::evaluations) return static_cast<double>(n);
  const auto z = draw_base_samples(spec.mc_samples, q,
                                   BaseMode::deterministic,
                                   derive_seed(seed, 0xCAB));
  const CounterRng rng(derive_seed(seed, 0xCA1));
  std::vector<double> reps;
  for (int rep = 0; rep < 3; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (long long i = 0; i < n; ++i) {
      Eigen::MatrixXd x(q, model.data().dim);
      for (int r = 0; r < q; ++r) {
        for (int c = 0; c < model.data().dim; ++c) {
          x(r, c) = rng.uniform(static_cast<std::uint64_t>(
              rep * n * q * model.data().dim + i * q * model.data().dim +
              r * model.data().dim + c));
        }
      }
      sink += mc_value(spec, x, model, z);
    }
    (void)sink;
    reps.push_back(std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count());
  }
  std::sort(reps.begin(), reps.end());
  return reps[1];
}

// ---------------------------------------------------------------------------
// Outer loop.
// ---------------------------------------------------------------------------

namespace harness_detail {

struct TaskHandle {
  std::function<double(const Eigen::VectorXd&)> value;
  double f_max = 0.0;
  bool synthetic = true;
};

inline TaskHandle make_task(const RunConfig& cfg, std::uint64_t trial_seed) {
  if (cfg.task.type == "synthetic") {
    auto task = std::make_shared<SyntheticTask>(sample_matern_task(
        cfg.task.dim, cfg.task.n_basis, derive_seed(trial_seed, 0x7A),
        cfg.task.true_max));
    return {[task](const Eigen::VectorXd& x) {
              return evaluate_task(*task, x);
            },
            task->true_max, true};
  }
  const BenchmarkName name = benchmark_from_string(cfg.task.benchmark);
  const int expected = benchmark_dim(name, cfg.task.dim);
  if (expected != cfg.task.dim) {
    throw ConfigError("RunConfig: dim does not match benchmark dimension");
  }
  return {[name](const Eigen::VectorXd& x) {
            return benchmark_value(name, x);
          },
          benchmark_optimum(name), false};
}

}  // namespace harness_detail

inline TrialRecord run_trial(const RunConfig& cfg, int trial_index) {
  cfg.validate();
  const std::uint64_t trial_seed =
      derive_seed(cfg.seed, 0x7214, static_cast<std::uint64_t>(trial_index));
  const auto start_time = std::chrono::steady_clock::now();
  const bool timed = cfg.budget_mode == BudgetMode::seconds;
  const auto wall = [&]() {
    return timed ? std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start_time)
                       .count()
                 : 0.0;
  };

  const auto task = harness_detail::make_task(cfg, trial_seed);
  ObservationChannel channel{cfg.task.noise_variance,
                             derive_seed(trial_seed, 0x0B), 0};

  TrialRecord record;
  record.trial = trial_index;
  record.seed = trial_seed;
  record.config_hash = config_hash(cfg);

  const int d = cfg.task.dim;
  Dataset data(d);
  const CounterRng init_rng(derive_seed(trial_seed, 0x11));
  for (int i = 0; i < cfg.n_initial; ++i) {
    Eigen::VectorXd x(d);
    for (int c = 0; c < d; ++c) {
      x(c) = init_rng.uniform(static_cast<std::uint64_t>(i * d + c));
    }
    data = fantasize(data, x, channel.observe_value(task.value(x)));
  }

  const auto regret_row = [&](int iteration, double acq_value) {
    Eigen::Index best_idx = 0;
    data.outputs.maxCoeff(&best_idx);
    const double best_obs = data.outputs(best_idx);
    const double f_at_best =
        task.value(data.inputs.row(best_idx).transpose());
    const double regret = std::abs(task.f_max - f_at_best);
    TrialRow row;
    row.iteration = iteration;
    row.wall_time_s = wall();
    row.best_observed = best_obs;
    row.log10_regret = std::log10(std::max(regret, 1e-12));
    row.acq_value = acq_value;
    return row;
  };
  record.rows.push_back(regret_row(0, 0.0));

  Hyperparams known_hp;
  if (cfg.surrogate == SurrogateMode::known_prior) {
    known_hp = Hyperparams::isotropic(
        d, std::sqrt(static_cast<double>(d)) / 4.0, 1.0,
        cfg.task.noise_variance, 0.0);
  }

  for (int iter = 1; iter <= cfg.n_iterations; ++iter) {
    if (cfg.total_eval_budget > 0 &&
        data.size() >= cfg.total_eval_budget) {
      break;
    }
    Hyperparams hp;
    if (cfg.surrogate == SurrogateMode::map_fit) {
      FitConfig fit_cfg = cfg.fit;
      fit_cfg.seed = derive_seed(trial_seed, 0xF1, iter);
      try {
        hp = fit_hyperparameters_map(data, fit_cfg, cfg.fit_restarts);
      } catch (const Error& e) {
        record.aborted = true;
        record.abort_reason = e.what();
        return record;
      }
    } else {
      hp = known_hp;
    }
    const GpModel model(data, hp);

    AcquisitionSpec spec = cfg.acq;
    if (cfg.alpha_mode == AlphaMode::best_observed) {
      spec.alpha = data.outputs.maxCoeff();
    }
    if (spec.kind == AcqKind::es || spec.kind == AcqKind::kg) {
      spec.discretization = low_discrepancy_points(
          cfg.discretization_size, d, derive_seed(trial_seed, 0xD15C, iter));
    }

    MaximizerConfig mx = cfg.maximizer;
    mx.bounds = Box::unit(d);
    mx.seed = derive_seed(trial_seed, 0x5E1, iter);
    mx.budget_mode = cfg.budget_mode;
    mx.budget = calibrate_inner_budget(
        static_cast<long long>(cfg.inner_budget), model, spec, cfg.q,
        cfg.budget_mode, mx.seed);

    SelectionResult selection;
    switch (cfg.parallel_mode) {
      case ParallelMode::greedy:
        selection = greedy_select(spec, cfg.q, model, mx);
        break;
      case ParallelMode::joint:
        selection = joint_select(spec, cfg.q, model, mx);
        break;
      case ParallelMode::incremental:
        selection =
            incremental_greedy_select(spec, cfg.q, cfg.n_fantasies, model, mx);
        break;
    }

    for (Eigen::Index r = 0; r < selection.x.rows(); ++r) {
      const Eigen::VectorXd x = selection.x.row(r).transpose();
      data = fantasize(data, x, channel.observe_value(task.value(x)));
    }
    record.rows.push_back(regret_row(iter, selection.acq_value));
  }
  return record;
}

inline std::vector<TrialRecord> run_experiment(const RunConfig& cfg) {
  cfg.validate();
  std::vector<TrialRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.n_trials));
  for (int t = 0; t < cfg.n_trials; ++t) {
    records.push_back(run_trial(cfg, t));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Results emission.
// ---------------------------------------------------------------------------

/// Writes one CSV (exact header below) plus a JSON metadata sidecar at
/// out_path + ".meta.json".  Both are written to temporaries and renamed, so
/// a failure leaves no partial file.  Re-emitting identical records yields
/// byte-identical files.
inline void emit_results(const std::vector<TrialRecord>& records,
                         const std::string& out_path,
                         const nlohmann::json& metadata) {
  if (records.empty()) throw InputError("emit_results: no records");
  namespace fs = std::filesystem;

  const auto write_atomic = [](const std::string& path,
                               const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("emit_results: cannot open " + tmp);
      out << content;
      if (!out) {
        out.close();
        std::error_code ec;
        fs::remove(tmp, ec);
        throw IoError("emit_results: write failed for " + tmp);
      }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
      fs::remove(tmp, ec);
      throw IoError("emit_results: rename failed for " + path);
    }
  };

  std::string csv = "trial,iteration,wall_time_s,best_observed,log10_regret,"
                    "acq_value\n";
  for (const auto& record : records) {
    for (const auto& row : record.rows) {
      csv += std::to_string(record.trial);
      csv += ',';
      csv += std::to_string(row.iteration);
      csv += ',';
      csv += harness_detail::format_double(row.wall_time_s);
      csv += ',';
      csv += harness_detail::format_double(row.best_observed);
      csv += ',';
      csv += harness_detail::format_double(row.log10_regret);
      csv += ',';
      csv += harness_detail::format_double(row.acq_value);
      csv += '\n';
    }
  }

  nlohmann::json meta = metadata;
  meta["software_version"] = kVersion;
  meta["n_trials"] = records.size();
  meta["config_hash"] = records.front().config_hash;
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& record : records) {
    trials.push_back({{"trial", record.trial},
                      {"seed", record.seed},
                      {"rows", record.rows.size()},
                      {"aborted", record.aborted},
                      {"abort_reason", record.abort_reason}});
  }
  meta["trials"] = trials;

  write_atomic(out_path, csv);
  write_atomic(out_path + ".meta.json", meta.dump(2) + "\n");
}

inline void emit_results(const std::vector<TrialRecord>& records,
                         const std::string& out_path) {
  emit_results(records, out_path, nlohmann::json::object());
}

}  // namespace qacq

#endif  // QACQ_HARNESS_HPP
