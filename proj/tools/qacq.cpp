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

// Command-line front end: `qacq run` drives the outer optimization loop and
// writes CSV results; `qacq verify` runs the oracle battery; `qacq task`
// samples and serializes a synthetic objective.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "qacq/harness.hpp"
#include "qacq/oracles.hpp"
#include "qacq/task_json.hpp"

namespace {

qacq::RunConfig load_config(const std::string& path) {
  nlohmann::json j = nlohmann::json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw qacq::IoError("cannot open config file " + path);
    in >> j;
  }
  return qacq::run_config_from_json(j);
}

nlohmann::json report_to_json(const qacq::OracleReport& report) {
  return nlohmann::json{{"check", report.name},
                        {"n_cases", report.n_cases},
                        {"metric", report.metric},
                        {"tolerance", report.tolerance},
                        {"pass", report.pass},
                        {"seed", report.seed},
                        {"note", report.note}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo acquisition toolkit for parallel Bayesian "
               "optimization"};
  app.require_subcommand(1);

  // --- run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run BO trials and emit results");
  std::string config_path;
  std::string task_override, acq_override, maximizer_override, mode_override,
      budget_mode_override, out_override;
  int dim_override = -1, q_override = -1, trials_override = -1,
      iters_override = -1;
  double inner_budget_override = -1.0;
  long long seed_override = -1;

  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--task", task_override,
                  "synthetic | branin | hartmann3 | hartmann6 | levy");
  run->add_option("--dim", dim_override, "input dimension");
  run->add_option("--q", q_override, "queries per outer iteration");
  run->add_option("--acq", acq_override, "ei | pi | sr | ucb | es | kg");
  run->add_option("--maximizer", maximizer_override, "grad | rs");
  run->add_option("--parallel-mode", mode_override,
                  "greedy | joint | incremental");
  run->add_option("--inner-budget", inner_budget_override,
                  "evaluations (or seconds) per inner maximization");
  run->add_option("--budget-mode", budget_mode_override, "evals | seconds");
  run->add_option("--trials", trials_override, "number of independent trials");
  run->add_option("--iters", iters_override, "outer iterations per trial");
  run->add_option("--seed", seed_override, "master seed");
  run->add_option("--out", out_override, "output CSV path");

  // --- verify ------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "run the oracle battery");
  std::string check_filter;
  long long verify_seed = 0;
  verify->add_option("--check", check_filter,
                     "substring filter on check names");
  verify->add_option("--seed", verify_seed, "battery seed");

  // --- task --------------------------------------------------------------
  auto* task_cmd =
      app.add_subcommand("task", "sample a synthetic task and write JSON");
  int task_dim = 2;
  int task_basis = 1 << 14;
  long long task_seed = 0;
  std::string task_out = "task.json";
  task_cmd->add_option("--dim", task_dim, "input dimension");
  task_cmd->add_option("--n-basis", task_basis, "number of basis functions");
  task_cmd->add_option("--seed", task_seed, "task seed");
  task_cmd->add_option("--out", task_out, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      qacq::RunConfig cfg = load_config(config_path);
      if (!task_override.empty()) {
        if (task_override == "synthetic") {
          cfg.task.type = "synthetic";
          cfg.task.benchmark.clear();
        } else {
          cfg.task.type = "benchmark";
          cfg.task.benchmark = task_override;
          cfg.surrogate = qacq::SurrogateMode::map_fit;
          cfg.task.dim = qacq::benchmark_dim(
              qacq::benchmark_from_string(task_override),
              dim_override > 0 ? dim_override : cfg.task.dim);
        }
      }
      if (dim_override > 0) cfg.task.dim = dim_override;
      if (q_override > 0) cfg.q = q_override;
      if (!acq_override.empty()) {
        cfg.acq.kind = qacq::acq_kind_from_string(acq_override);
      }
      if (!maximizer_override.empty()) {
        if (maximizer_override == "grad") {
          cfg.maximizer.kind = qacq::MaximizerKind::grad_ascent;
        } else if (maximizer_override == "rs") {
          cfg.maximizer.kind = qacq::MaximizerKind::random_search;
        } else {
          throw qacq::ConfigError("--maximizer must be grad|rs");
        }
      }
      if (!mode_override.empty()) {
        if (mode_override == "greedy") {
          cfg.parallel_mode = qacq::ParallelMode::greedy;
        } else if (mode_override == "joint") {
          cfg.parallel_mode = qacq::ParallelMode::joint;
        } else if (mode_override == "incremental") {
          cfg.parallel_mode = qacq::ParallelMode::incremental;
        } else {
          throw qacq::ConfigError(
              "--parallel-mode must be greedy|joint|incremental");
        }
      }
      if (inner_budget_override > 0) cfg.inner_budget = inner_budget_override;
      if (!budget_mode_override.empty()) {
        if (budget_mode_override == "evals") {
          cfg.budget_mode = qacq::BudgetMode::evaluations;
        } else if (budget_mode_override == "seconds") {
          cfg.budget_mode = qacq::BudgetMode::seconds;
        } else {
          throw qacq::ConfigError("--budget-mode must be evals|seconds");
        }
      }
      if (trials_override > 0) cfg.n_trials = trials_override;
      if (iters_override >= 0) cfg.n_iterations = iters_override;
      if (seed_override >= 0) {
        cfg.seed = static_cast<std::uint64_t>(seed_override);
      }
      if (!out_override.empty()) cfg.out = out_override;
      cfg.validate();

      const auto records = qacq::run_experiment(cfg);
      qacq::emit_results(records, cfg.out, qacq::run_config_to_json(cfg));

      int aborted = 0;
      for (const auto& record : records) aborted += record.aborted ? 1 : 0;
      std::cout << "wrote " << cfg.out << " (" << records.size()
                << " trials, " << aborted << " aborted, config "
                << qacq::config_hash(cfg) << ")\n";
      return aborted == 0 ? 0 : 1;
    }

    if (*verify) {
      const auto reports = qacq::run_verification_battery(
          static_cast<std::uint64_t>(verify_seed), check_filter);
      if (reports.empty()) {
        std::cerr << "no checks match filter '" << check_filter << "'\n";
        return 2;
      }
      bool all_pass = true;
      for (const auto& report : reports) {
        std::cout << report_to_json(report).dump() << "\n";
        all_pass = all_pass && report.pass;
      }
      return all_pass ? 0 : 1;
    }

    if (*task_cmd) {
      const auto task = qacq::sample_matern_task(
          task_dim, task_basis, static_cast<std::uint64_t>(task_seed));
      std::ofstream out(task_out, std::ios::binary | std::ios::trunc);
      if (!out) throw qacq::IoError("cannot open " + task_out);
      out << qacq::task_to_json(task).dump(2) << "\n";
      std::cout << "wrote " << task_out << " (true_max " << task.true_max
                << ")\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
