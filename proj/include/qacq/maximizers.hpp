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

#ifndef QACQ_MAXIMIZERS_HPP
#define QACQ_MAXIMIZERS_HPP

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "qacq/acquisitions.hpp"
#include "qacq/errors.hpp"
#include "qacq/gp.hpp"
#include "qacq/rng.hpp"

namespace qacq {

enum class MaximizerKind { grad_ascent, random_search };
enum class BudgetMode { evaluations, seconds };

/// Axis-aligned feasible box.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box unit(int d) {
    return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
  }

  [[nodiscard]] int dim() const { return static_cast<int>(lo.size()); }

  void clamp(Eigen::MatrixXd& points) const {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      points.col(c) = points.col(c).cwiseMax(lo(c)).cwiseMin(hi(c));
    }
  }

  [[nodiscard]] Eigen::MatrixXd sample(int n, const CounterRng& rng,
                                       std::uint64_t offset = 0) const {
    Eigen::MatrixXd out(n, dim());
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < dim(); ++c) {
        out(i, c) = lo(c) + (hi(c) - lo(c)) *
                                rng.uniform(offset + static_cast<std::uint64_t>(
                                                         i * dim() + c));
      }
    }
    return out;
  }
};

struct MaximizerConfig {
  MaximizerKind kind = MaximizerKind::grad_ascent;
  int n_starts = 32;             // 32 greedy / 64 joint by convention
  double step_size = 1.0 / 40.0;
  int minibatch = 128;
  BudgetMode budget_mode = BudgetMode::evaluations;
  double budget = 4096;          // objective evaluations or seconds
  Box bounds;                    // defaults to the unit cube at use sites
  std::uint64_t seed = 0;
  int rs_batch = 1024;           // sample count of random search's estimator
  bool pending_fantasy = true;   // greedy: condition on chosen points
  Eigen::MatrixXd candidates;    // optional finite ground set (greedy rounds)

  void validate() const {
    if (n_starts < 1) throw ConfigError("MaximizerConfig: n_starts >= 1");
    if (!(step_size > 0.0)) throw ConfigError("MaximizerConfig: step_size");
    if (!(budget > 0.0)) throw ConfigError("MaximizerConfig: budget > 0");
    if (minibatch < 1) throw ConfigError("MaximizerConfig: minibatch >= 1");
  }
};

struct SelectionResult {
  Eigen::MatrixXd x;  // q x d
  double acq_value = 0.0;
  long long evaluations = 0;
  double elapsed_s = 0.0;
  bool budget_warning = false;
};

/// Inner-loop objective: a deterministic value for ranking plus a minibatch
/// gradient whose variates are keyed by the step counter.
struct InnerObjective {
  std::function<double(const Eigen::MatrixXd&)> value;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, std::uint64_t)>
      gradient;
};

namespace detail {

class BudgetTracker {
 public:
  BudgetTracker(BudgetMode mode, double budget)
      : mode_(mode), budget_(budget),
        start_(std::chrono::steady_clock::now()) {}

  void charge(long long n = 1) { evaluations_ += n; }

  [[nodiscard]] long long evaluations() const { return evaluations_; }

  [[nodiscard]] double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

  [[nodiscard]] bool exhausted() const {
    return mode_ == BudgetMode::evaluations
               ? static_cast<double>(evaluations_) >= budget_
               : elapsed_s() >= budget_;
  }

  /// Remaining evaluations (evaluations mode only).
  [[nodiscard]] long long remaining() const {
    return static_cast<long long>(budget_) - evaluations_;
  }

 private:
  BudgetMode mode_;
  double budget_;
  long long evaluations_ = 0;
  std::chrono::steady_clock::time_point start_;
};

inline Eigen::MatrixXd unflatten_row(const Eigen::RowVectorXd& row, int q,
                                     int d) {
  Eigen::MatrixXd x(q, d);
  for (int i = 0; i < q; ++i) x.row(i) = row.segment(i * d, d);
  return x;
}

}  // namespace detail

/// Adam ascent from each start (rows of `starts`, flattened q*d points),
/// projecting onto the bounds after every step.  Each start spends an equal
/// share of the budget; the start with the best final deterministic value
/// wins, ties toward the lowest start index.  If the budget cannot fund a
/// single gradient step the raw starts are ranked instead and the result
/// carries a warning flag.
inline SelectionResult grad_ascend_multistart(const InnerObjective& objective,
                                              const Eigen::MatrixXd& starts,
                                              int q,
                                              const MaximizerConfig& cfg) {
  cfg.validate();
  const int d = cfg.bounds.dim();
  if (starts.cols() != q * d || starts.rows() < 1) {
    throw InputError("grad_ascend_multistart: starts must be s x (q*d)");
  }
  const auto s = starts.rows();
  detail::BudgetTracker tracker(cfg.budget_mode, cfg.budget);

  long long steps_per_start = 0;
  bool warning = false;
  if (cfg.budget_mode == BudgetMode::evaluations) {
    steps_per_start = (static_cast<long long>(cfg.budget) - s) / s;
    if (steps_per_start < 1) {
      steps_per_start = 0;
      warning = true;
    }
  }
  const double time_share =
      cfg.budget_mode == BudgetMode::seconds
          ? cfg.budget / static_cast<double>(s)
          : 0.0;

  SelectionResult best;
  best.acq_value = -std::numeric_limits<double>::infinity();

  for (Eigen::Index start = 0; start < s; ++start) {
    Eigen::MatrixXd x = detail::unflatten_row(starts.row(start), q, d);
    cfg.bounds.clamp(x);

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(q, d);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(q, d);
    double b1t = 1.0, b2t = 1.0;
    const double deadline =
        time_share * static_cast<double>(start + 1);

    for (long long step = 0;; ++step) {
      if (cfg.budget_mode == BudgetMode::evaluations) {
        if (step >= steps_per_start) break;
      } else if (tracker.elapsed_s() >= deadline || tracker.exhausted()) {
        break;
      }
      const std::uint64_t key = derive_seed(
          cfg.seed, static_cast<std::uint64_t>(start) + 1,
          static_cast<std::uint64_t>(step) + 1);
      const Eigen::MatrixXd grad = objective.gradient(x, key);
      tracker.charge();

      m = 0.9 * m + 0.1 * grad;
      v = 0.999 * v.array() + 0.001 * grad.array().square();
      b1t *= 0.9;
      b2t *= 0.999;
      const Eigen::ArrayXXd m_hat = m.array() / (1.0 - b1t);
      const Eigen::ArrayXXd v_hat = v.array() / (1.0 - b2t);
      x.array() += cfg.step_size * m_hat / (v_hat.sqrt() + 1e-8);
      cfg.bounds.clamp(x);
    }

    const double value = objective.value(x);
    tracker.charge();
    if (value > best.acq_value) {
      best.acq_value = value;
      best.x = x;
    }
  }

  best.evaluations = tracker.evaluations();
  best.elapsed_s = tracker.elapsed_s();
  best.budget_warning = warning;
  return best;
}

/// Uniform random search with the deterministic estimator; evaluates in
/// batches and returns the best sample seen.
inline SelectionResult random_search(
    const std::function<double(const Eigen::MatrixXd&)>& value_fn, int q,
    const MaximizerConfig& cfg) {
  cfg.validate();
  const int d = cfg.bounds.dim();
  detail::BudgetTracker tracker(cfg.budget_mode, cfg.budget);
  const CounterRng rng(derive_seed(cfg.seed, 0x5253ULL));

  SelectionResult best;
  best.acq_value = -std::numeric_limits<double>::infinity();
  std::uint64_t draw = 0;
  while (!tracker.exhausted()) {
    Eigen::MatrixXd x(q, d);
    for (int i = 0; i < q; ++i) {
      for (int c = 0; c < d; ++c) {
        x(i, c) = cfg.bounds.lo(c) +
                  (cfg.bounds.hi(c) - cfg.bounds.lo(c)) * rng.uniform(draw++);
      }
    }
    const double value = value_fn(x);
    tracker.charge();
    if (value > best.acq_value) {
      best.acq_value = value;
      best.x = x;
    }
  }
  if (best.x.size() == 0) {
    // Budget did not admit a single evaluation; return the box center.
    best.x = 0.5 * (cfg.bounds.lo + cfg.bounds.hi).transpose().replicate(q, 1);
    best.acq_value = value_fn(best.x);
    tracker.charge();
    best.budget_warning = true;
  }
  best.evaluations = tracker.evaluations();
  best.elapsed_s = tracker.elapsed_s();
  return best;
}

/// Starting points drawn proportional to the positive part of a cheap
/// marginal acquisition over a candidate pool (2048 uniform points plus 512
/// local perturbations of the incumbent).  Falls back to uniform sampling
/// when no pool point scores positive, which sidesteps acquisition plateaus.
inline Eigen::MatrixXd multi_start_init(
    const std::function<double(const Eigen::VectorXd&)>& marginal_acq,
    int n_points, const Box& bounds, std::uint64_t seed,
    const Eigen::VectorXd* incumbent = nullptr,
    double init_budget_s = std::numeric_limits<double>::infinity()) {
  if (n_points < 1) throw ConfigError("multi_start_init: n_points >= 1");
  const int d = bounds.dim();
  const CounterRng rng(derive_seed(seed, 0x1417ULL));
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(init_budget_s);

  constexpr int kUniformPool = 2048;
  constexpr int kLocalPool = 512;
  Eigen::MatrixXd pool(kUniformPool + kLocalPool, d);
  pool.topRows(kUniformPool) = bounds.sample(kUniformPool, rng, 0);
  if (incumbent != nullptr) {
    for (int i = 0; i < kLocalPool; ++i) {
      for (int c = 0; c < d; ++c) {
        const double width = bounds.hi(c) - bounds.lo(c);
        pool(kUniformPool + i, c) =
            (*incumbent)(c) +
            0.05 * width *
                rng.normal(1000000 + static_cast<std::uint64_t>(i * d + c));
      }
    }
  } else {
    pool.bottomRows(kLocalPool) = bounds.sample(kLocalPool, rng, 500000);
  }
  {
    Eigen::MatrixXd clamped = pool;
    bounds.clamp(clamped);
    pool = clamped;
  }

  Eigen::VectorXd weights = Eigen::VectorXd::Zero(pool.rows());
  Eigen::Index scored = 0;
  for (; scored < pool.rows(); ++scored) {
    if (std::chrono::steady_clock::now() >= deadline) break;
    weights(scored) =
        std::max(0.0, marginal_acq(pool.row(scored).transpose()));
  }
  if (scored == 0) scored = 1;  // always keep at least one candidate

  const double total = weights.head(scored).sum();
  Eigen::MatrixXd out(n_points, d);
  if (total <= 0.0) {
    for (int k = 0; k < n_points; ++k) {
      const auto idx = static_cast<Eigen::Index>(
          rng.uniform(2000000 + k) * static_cast<double>(scored));
      out.row(k) = pool.row(std::min(idx, scored - 1));
    }
    return out;
  }
  for (int k = 0; k < n_points; ++k) {
    double u = rng.uniform(3000000 + k) * total;
    Eigen::Index idx = 0;
    for (; idx < scored - 1; ++idx) {
      u -= weights(idx);
      if (u <= 0.0) break;
    }
    out.row(k) = pool.row(idx);
  }
  return out;
}

namespace detail {

/// Cheap closed-form marginal score used to seed multi-start optimization.
inline double marginal_score(const AcquisitionSpec& spec, const GpModel& model,
                             const Eigen::VectorXd& x) {
  const auto [mu, var] = model.mean_variance_at(x);
  const double sd = std::sqrt(std::max(var, 0.0));
  switch (spec.kind) {
    case AcqKind::ei:
      return marginal_ei_closed_form(mu, var, spec.alpha);
    case AcqKind::pi:
      return sd > 1e-12 ? normal_cdf((mu - spec.alpha) / sd)
                        : (mu > spec.alpha ? 1.0 : 0.0);
    case AcqKind::sr:
      return mu;
    case AcqKind::ucb:
      return mu + std::sqrt(spec.beta) * sd;
    case AcqKind::es:
    case AcqKind::kg:
      // No cheap marginal form; a confidence-bound score still steers
      // starts away from dead regions.
      return mu + 2.0 * sd;
  }
  return 0.0;
}

inline Eigen::MatrixXd vstack(const Eigen::MatrixXd& top,
                              const Eigen::RowVectorXd& bottom) {
  Eigen::MatrixXd out(top.rows() + 1, bottom.size());
  if (top.rows() > 0) out.topRows(top.rows()) = top;
  out.bottomRows(1) = bottom;
  return out;
}

/// Box projection can push several query rows onto one boundary point,
/// where sample-path gradients are undefined.  Nudges later rows of any
/// coincident pair toward the box interior; the returned set is what the
/// gradient is evaluated at.
inline Eigen::MatrixXd separate_duplicate_rows(Eigen::MatrixXd x,
                                               const Box& bounds,
                                               double tol = 1e-8) {
  const auto d = x.cols();
  for (int attempt = 1; attempt <= 3; ++attempt) {
    bool clean = true;
    int pair = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
        if ((x.row(i) - x.row(j)).norm() >= tol) continue;
        clean = false;
        ++pair;
        const Eigen::Index c = (j + pair) % d;
        const double mid = 0.5 * (bounds.lo(c) + bounds.hi(c));
        const double width = bounds.hi(c) - bounds.lo(c);
        const double step = attempt * pair * 1e-6 * width;
        x(j, c) += x(j, c) <= mid ? step : -step;
      }
    }
    if (clean) break;
  }
  return x;
}

}  // namespace detail

namespace detail {

/// Per-sample pointwise utilities over a finite candidate grid, sampled
/// jointly so that indexing a subset of columns is exactly the subset's
/// acquisition estimator (GP marginalization).  Rows are samples.
inline Eigen::MatrixXd grid_pointwise_utilities(const AcquisitionSpec& spec,
                                                const Eigen::MatrixXd& grid,
                                                const GpModel& model,
                                                const BaseSamples& z) {
  const auto mom = model.moments(grid);
  Eigen::MatrixXd chol_eff = mom.chol;
  if (spec.kind == AcqKind::ucb) {
    chol_eff *= ucb_chol_scale(spec.beta);
  }
  const auto paths = reparameterize(mom.mean, chol_eff, z);
  Eigen::MatrixXd util(paths.y.rows(), paths.y.cols());
  for (Eigen::Index k = 0; k < paths.y.rows(); ++k) {
    for (Eigen::Index i = 0; i < paths.y.cols(); ++i) {
      util(k, i) = pointwise_utility(spec, paths.y(k, i), mom.mean(i));
    }
  }
  return util;
}

}  // namespace detail

/// Greedy parallel selection: q rounds, each maximizing the joint
/// acquisition of (chosen set + candidate) over the single new point with an
/// equal share of the budget.  Already-chosen (pending) points are by
/// default also conditioned into the surrogate as fantasies at their
/// predictive mean, which suppresses re-selection of the same neighborhood.
/// When cfg.candidates is non-empty the rounds instead run exact greedy on
/// the fixed sampled-path set function over that grid.
inline SelectionResult greedy_select(const AcquisitionSpec& spec, int q,
                                     const GpModel& model,
                                     const MaximizerConfig& cfg) {
  if (q < 1) throw ConfigError("greedy_select: q >= 1");
  cfg.validate();
  spec.validate();
  const int d = cfg.bounds.dim();
  detail::BudgetTracker total_tracker(cfg.budget_mode, cfg.budget);

  Eigen::MatrixXd chosen(0, d);
  long long evaluations = 0;
  bool warning = false;

  if (cfg.candidates.rows() > 0) {
    // Finite ground set: common sample paths over the whole grid define one
    // submodular set function; each round adds its exact argmax column.
    const auto g = cfg.candidates.rows();
    if (q > g) throw ConfigError("greedy_select: q exceeds candidate count");
    const auto z = draw_base_samples(spec.mc_samples, static_cast<int>(g),
                                     BaseMode::deterministic,
                                     derive_seed(cfg.seed, 0x47));
    const Eigen::MatrixXd util =
        detail::grid_pointwise_utilities(spec, cfg.candidates, model, z);
    std::vector<bool> taken(static_cast<std::size_t>(g), false);
    Eigen::VectorXd running_max = Eigen::VectorXd::Constant(
        util.rows(), -std::numeric_limits<double>::infinity());
    for (int round = 0; round < q; ++round) {
      Eigen::Index best_idx = -1;
      double best_val = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < g; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        const double val =
            running_max.cwiseMax(util.col(i)).mean();
        ++evaluations;
        if (val > best_val) {
          best_val = val;
          best_idx = i;
        }
      }
      taken[static_cast<std::size_t>(best_idx)] = true;
      running_max = running_max.cwiseMax(util.col(best_idx));
      chosen = detail::vstack(chosen, cfg.candidates.row(best_idx));
    }
  } else {
    GpModel ctx = model;
    for (int round = 0; round < q; ++round) {
      const std::uint64_t round_seed =
          derive_seed(cfg.seed, 0x47 + static_cast<std::uint64_t>(round));
      // Random search ranks with a larger fixed-sample estimator.
      const int m_det = cfg.kind == MaximizerKind::random_search
                            ? cfg.rs_batch
                            : spec.mc_samples;
      const auto z_round = draw_base_samples(
          m_det, static_cast<int>(chosen.rows()) + 1,
          BaseMode::deterministic, round_seed);
      const GpModel round_model = ctx;
      const Eigen::MatrixXd chosen_copy = chosen;

      const auto round_value = [&spec, round_model, z_round,
                                chosen_copy](const Eigen::MatrixXd& x_new) {
        return mc_value(spec, detail::vstack(chosen_copy, x_new.row(0)),
                        round_model, z_round);
      };

      MaximizerConfig round_cfg = cfg;
      round_cfg.budget = cfg.budget / q;
      round_cfg.seed = round_seed;
      // n_starts is the total across rounds; each round trades width for
      // longer per-start trajectories.
      round_cfg.n_starts = std::max(1, cfg.n_starts / q);

      SelectionResult round_result;
      if (cfg.kind == MaximizerKind::random_search) {
        round_result = random_search(round_value, 1, round_cfg);
      } else {
        const int minibatch = cfg.minibatch;
        const Box bounds = cfg.bounds;
        const InnerObjective objective{
            round_value,
            [&spec, round_model, chosen_copy, minibatch, bounds](
                const Eigen::MatrixXd& x_new,
                std::uint64_t step_key) -> Eigen::MatrixXd {
              const auto z_mb = draw_base_samples(
                  minibatch, static_cast<int>(chosen_copy.rows()) + 1,
                  BaseMode::deterministic, step_key);
              const Eigen::MatrixXd joint = detail::separate_duplicate_rows(
                  detail::vstack(chosen_copy, x_new.row(0)), bounds);
              return mc_gradient(spec, joint, round_model, z_mb)
                  .bottomRows(1);
            }};
        const Eigen::MatrixXd starts = multi_start_init(
            [&](const Eigen::VectorXd& x) {
              return detail::marginal_score(spec, round_model, x);
            },
            round_cfg.n_starts, cfg.bounds, derive_seed(round_seed, 0x15));
        round_result =
            grad_ascend_multistart(objective, starts, 1, round_cfg);
      }
      const Eigen::RowVectorXd picked = round_result.x.row(0);
      evaluations += round_result.evaluations;
      warning = warning || round_result.budget_warning;

      chosen = detail::vstack(chosen, picked);
      if (cfg.pending_fantasy && round + 1 < q) {
        const Eigen::VectorXd xp = picked.transpose();
        ctx = ctx.fantasized(xp, ctx.mean_at(xp));
      }
    }
  }

  SelectionResult out;
  out.x = chosen;
  const auto z_final = draw_base_samples(spec.mc_samples, q,
                                         BaseMode::deterministic,
                                         derive_seed(cfg.seed, 0xF1AA));
  out.acq_value = mc_value(spec, chosen, model, z_final);
  out.evaluations = evaluations + 1;
  out.elapsed_s = total_tracker.elapsed_s();
  out.budget_warning = warning;
  return out;
}

/// Joint parallel selection: one maximization of the q*d-dimensional
/// acquisition with the full budget.
inline SelectionResult joint_select(const AcquisitionSpec& spec, int q,
                                    const GpModel& model,
                                    const MaximizerConfig& cfg) {
  if (q < 1) throw ConfigError("joint_select: q >= 1");
  cfg.validate();
  spec.validate();
  const int d = cfg.bounds.dim();
  // Seed tags match greedy's first round so q = 1 joint and greedy runs
  // coincide bit for bit.
  const std::uint64_t run_seed = derive_seed(cfg.seed, 0x47);
  const int m_det = cfg.kind == MaximizerKind::random_search
                        ? cfg.rs_batch
                        : spec.mc_samples;
  const auto z_det = draw_base_samples(m_det, q, BaseMode::deterministic,
                                       run_seed);

  const auto value_fn = [&](const Eigen::MatrixXd& x) {
    return mc_value(spec, x, model, z_det);
  };

  SelectionResult result;
  if (cfg.kind == MaximizerKind::random_search) {
    MaximizerConfig rs_cfg = cfg;
    rs_cfg.seed = run_seed;
    result = random_search(value_fn, q, rs_cfg);
  } else {
    const InnerObjective objective{
        value_fn,
        [&](const Eigen::MatrixXd& x, std::uint64_t step_key) {
          const auto z_mb = draw_base_samples(cfg.minibatch, q,
                                              BaseMode::deterministic,
                                              step_key);
          return mc_gradient(
              spec, detail::separate_duplicate_rows(x, cfg.bounds), model,
              z_mb);
        }};

    // Each start is a query set assembled from the scored pool.
    const Eigen::MatrixXd pool = multi_start_init(
        [&](const Eigen::VectorXd& x) {
          return detail::marginal_score(spec, model, x);
        },
        cfg.n_starts * q, cfg.bounds, derive_seed(run_seed, 0x15));
    Eigen::MatrixXd starts(cfg.n_starts, q * d);
    for (int s = 0; s < cfg.n_starts; ++s) {
      for (int j = 0; j < q; ++j) {
        starts.row(s).segment(j * d, d) = pool.row(s * q + j);
      }
    }
    MaximizerConfig ga_cfg = cfg;
    ga_cfg.seed = run_seed;
    result = grad_ascend_multistart(objective, starts, q, ga_cfg);
  }

  const auto z_final = draw_base_samples(spec.mc_samples, q,
                                         BaseMode::deterministic,
                                         derive_seed(cfg.seed, 0xF1AA));
  result.acq_value = mc_value(spec, result.x, model, z_final);
  result.evaluations += 1;
  return result;
}

enum class FantasyMode { sample, mean };

/// Greedy selection through the incremental (fantasy-averaged closed-form)
/// expected improvement.  Round one maximizes the marginal EI; its outcome
/// distribution spawns n_fantasies states, and every later round maximizes
/// the state-averaged closed-form EI, then extends each state with exactly
/// one fantasized outcome (never resampled).
inline SelectionResult incremental_greedy_select(
    const AcquisitionSpec& spec, int q, int n_fantasies, const GpModel& model,
    const MaximizerConfig& cfg, FantasyMode fantasy_mode = FantasyMode::sample) {
  if (spec.kind != AcqKind::ei) {
    throw ConfigError("incremental_greedy_select: EI only");
  }
  if (q < 1) throw ConfigError("incremental_greedy_select: q >= 1");
  if (n_fantasies < 1) {
    throw ConfigError("incremental_greedy_select: n_fantasies >= 1");
  }
  cfg.validate();
  const int d = cfg.bounds.dim();
  detail::BudgetTracker total_tracker(cfg.budget_mode, cfg.budget);
  const CounterRng fantasy_rng(derive_seed(cfg.seed, 0xFA27ULL));

  std::vector<FantasyState> states;
  Eigen::MatrixXd chosen(0, d);
  long long evaluations = 0;
  bool warning = false;

  for (int round = 0; round < q; ++round) {
    const std::uint64_t round_seed =
        derive_seed(cfg.seed, 0x93 + static_cast<std::uint64_t>(round));

    const auto round_value = [&](const Eigen::MatrixXd& x) {
      const Eigen::VectorXd xv = x.row(0).transpose();
      return round == 0 ? marginal_ei_closed_form(xv, model, spec.alpha)
                        : incremental_ei_value(xv, states);
    };
    const auto round_grad = [&](const Eigen::MatrixXd& x,
                                std::uint64_t) -> Eigen::MatrixXd {
      const Eigen::VectorXd xv = x.row(0).transpose();
      const Eigen::VectorXd g =
          round == 0 ? marginal_ei_gradient(xv, model, spec.alpha)
                     : incremental_ei_gradient(xv, states);
      return g.transpose();
    };

    MaximizerConfig round_cfg = cfg;
    round_cfg.budget = cfg.budget / q;
    round_cfg.seed = round_seed;

    SelectionResult round_result;
    if (cfg.kind == MaximizerKind::random_search) {
      round_result = random_search(round_value, 1, round_cfg);
    } else {
      const Eigen::MatrixXd starts = multi_start_init(
          [&](const Eigen::VectorXd& x) {
            Eigen::MatrixXd row = x.transpose();
            return round_value(row);
          },
          cfg.n_starts, cfg.bounds, derive_seed(round_seed, 0x15));
      round_result = grad_ascend_multistart({round_value, round_grad}, starts,
                                            1, round_cfg);
    }
    evaluations += round_result.evaluations;
    warning = warning || round_result.budget_warning;
    const Eigen::VectorXd x_new = round_result.x.row(0).transpose();
    chosen = detail::vstack(chosen, round_result.x.row(0));

    if (round + 1 >= q) break;
    if (round == 0) {
      // Spawn the fantasy states from the first point's outcome belief.
      const auto [mu, var] = model.mean_variance_at(x_new);
      const double sd = std::sqrt(std::max(var, 0.0));
      states.reserve(n_fantasies);
      for (int i = 0; i < n_fantasies; ++i) {
        const double y = fantasy_mode == FantasyMode::mean
                             ? mu
                             : mu + sd * fantasy_rng.normal(i);
        states.push_back(
            {model.fantasized(x_new, y), std::max(spec.alpha, y)});
      }
    } else {
      // One fresh outcome per state; earlier fantasies are never resampled.
      for (int i = 0; i < n_fantasies; ++i) {
        auto& state = states[static_cast<std::size_t>(i)];
        const auto [mu, var] = state.model.mean_variance_at(x_new);
        const double sd = std::sqrt(std::max(var, 0.0));
        const double y =
            fantasy_mode == FantasyMode::mean
                ? mu
                : mu + sd * fantasy_rng.normal(
                                static_cast<std::uint64_t>(round) * 100000 + i);
        state = extend_state(state, x_new, y);
      }
    }
  }

  SelectionResult out;
  out.x = chosen;
  const auto z_final = draw_base_samples(spec.mc_samples, q,
                                         BaseMode::deterministic,
                                         derive_seed(cfg.seed, 0xF1AA));
  out.acq_value = mc_value(spec, chosen, model, z_final);
  out.evaluations = evaluations + 1;
  out.elapsed_s = total_tracker.elapsed_s();
  out.budget_warning = warning;
  return out;
}

}  // namespace qacq

#endif  // QACQ_MAXIMIZERS_HPP
