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

#ifndef QACQ_ACQUISITIONS_HPP
#define QACQ_ACQUISITIONS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qacq/errors.hpp"
#include "qacq/gp.hpp"
#include "qacq/linalg.hpp"
#include "qacq/math.hpp"
#include "qacq/reparam.hpp"

namespace qacq {

enum class AcqKind { ei, pi, sr, ucb, es, kg };

inline bool is_myopic_maximal(AcqKind kind) {
  return kind == AcqKind::ei || kind == AcqKind::pi || kind == AcqKind::sr ||
         kind == AcqKind::ucb;
}

inline std::string to_string(AcqKind kind) {
  switch (kind) {
    case AcqKind::ei: return "ei";
    case AcqKind::pi: return "pi";
    case AcqKind::sr: return "sr";
    case AcqKind::ucb: return "ucb";
    case AcqKind::es: return "es";
    case AcqKind::kg: return "kg";
  }
  return "?";
}

inline AcqKind acq_kind_from_string(const std::string& name) {
  if (name == "ei") return AcqKind::ei;
  if (name == "pi") return AcqKind::pi;
  if (name == "sr") return AcqKind::sr;
  if (name == "ucb") return AcqKind::ucb;
  if (name == "es") return AcqKind::es;
  if (name == "kg") return AcqKind::kg;
  throw ConfigError("unknown acquisition kind: " + name);
}

struct AcquisitionSpec {
  AcqKind kind = AcqKind::ei;
  double alpha = 0.0;  // improvement threshold (EI, PI)
  double beta = 2.0;   // confidence multiplier (UCB)
  double tau = 0.05;   // concrete temperature (PI, ES)
  Eigen::MatrixXd discretization;  // b x d reference set (ES, KG)
  int mc_samples = 128;
  BaseMode base_mode = BaseMode::deterministic;
  int inner_mc_samples = 64;  // ES inner expectation

  void validate() const {
    if (!(tau > 0.0)) throw ConfigError("AcquisitionSpec: tau must be > 0");
    if (mc_samples < 1) {
      throw ConfigError("AcquisitionSpec: mc_samples must be >= 1");
    }
    if ((kind == AcqKind::es || kind == AcqKind::kg) &&
        discretization.rows() == 0) {
      throw ConfigError("AcquisitionSpec: ES/KG need a discretization");
    }
    if (kind == AcqKind::es && inner_mc_samples < 1) {
      throw ConfigError("AcquisitionSpec: inner_mc_samples must be >= 1");
    }
  }
};

/// Per-sample utility values and subgradients for the myopic-maximal family.
struct UtilityBatch {
  Eigen::VectorXd values;   // m
  Eigen::MatrixXd grad_y;   // m x q, d utility / d y with variates fixed
  Eigen::MatrixXd grad_mu;  // m x q, total d utility / d mu with variates fixed
};

namespace detail {

/// Pointwise utility inside the max, evaluated on one outcome coordinate.
inline double pointwise_utility(const AcquisitionSpec& spec, double y,
                                double mu) {
  switch (spec.kind) {
    case AcqKind::ei: return relu(y - spec.alpha);
    case AcqKind::pi: return sigmoid((y - spec.alpha) / spec.tau);
    case AcqKind::sr: return y;
    case AcqKind::ucb: return mu + std::abs(y - mu);
    default:
      throw ConfigError("pointwise utility is defined for EI/PI/SR/UCB only");
  }
}

/// sqrt(beta * pi / 2): the residual scaling folded into the Cholesky
/// factor for the parallel-UCB expectation.
inline double ucb_chol_scale(double beta) {
  return std::sqrt(beta * kPi / 2.0);
}

}  // namespace detail

/// Utility values and subgradients per sample path, one row of `paths` at a
/// time.  Argmax ties break toward the lowest index.  For UCB the paths must
/// have been drawn with the scaled Cholesky factor (see mc_value).
inline UtilityBatch utility(const AcquisitionSpec& spec,
                            const SamplePaths& paths,
                            const Eigen::VectorXd& mu) {
  if (!is_myopic_maximal(spec.kind)) {
    throw ConfigError("utility: use es_concrete_value / kg_value for ES/KG");
  }
  spec.validate();
  const auto m = paths.y.rows();
  const auto q = paths.y.cols();
  if (mu.size() != q) throw InputError("utility: mu size mismatch");

  UtilityBatch out;
  out.values.resize(m);
  out.grad_y = Eigen::MatrixXd::Zero(m, q);
  out.grad_mu = Eigen::MatrixXd::Zero(m, q);

  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::Index best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < q; ++j) {
      const double v = detail::pointwise_utility(spec, paths.y(k, j), mu(j));
      if (v > best_val) {
        best_val = v;
        best = j;
      }
    }
    out.values(k) = best_val;
    const double y = paths.y(k, best);
    switch (spec.kind) {
      case AcqKind::ei:
        if (y > spec.alpha) {
          out.grad_y(k, best) = 1.0;
          out.grad_mu(k, best) = 1.0;
        }
        break;
      case AcqKind::pi: {
        const double s = sigmoid((y - spec.alpha) / spec.tau);
        out.grad_y(k, best) = s * (1.0 - s) / spec.tau;
        out.grad_mu(k, best) = out.grad_y(k, best);
        break;
      }
      case AcqKind::sr:
        out.grad_y(k, best) = 1.0;
        out.grad_mu(k, best) = 1.0;
        break;
      case AcqKind::ucb: {
        const double g = y - mu(best);
        out.grad_y(k, best) = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
        out.grad_mu(k, best) = 1.0;
        break;
      }
      default:
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Non-myopic acquisitions over a discretized reference set.
// ---------------------------------------------------------------------------

namespace detail {

/// Tag separating the ES inner-sample stream from the outer one.
inline constexpr std::uint64_t kEsInnerStream = 0x4553696e6e6572ULL;

struct JointBlocks {
  MvnMoments mom;         // over [X; X_b]
  Eigen::MatrixXd la;     // q x q leading block of the joint factor
  Eigen::MatrixXd v;      // La^{-1} Sigma_ab, q x b
  Eigen::VectorXd mu_b;   // b
};

inline JointBlocks joint_blocks(const Eigen::MatrixXd& x_query,
                                const AcquisitionSpec& spec,
                                const GpModel& model) {
  const auto q = x_query.rows();
  const auto b = spec.discretization.rows();
  if (spec.discretization.cols() != x_query.cols()) {
    throw ConfigError("discretization dimension mismatch");
  }
  Eigen::MatrixXd joint(q + b, x_query.cols());
  joint.topRows(q) = x_query;
  joint.bottomRows(b) = spec.discretization;

  JointBlocks blocks;
  blocks.mom = model.moments(joint);
  blocks.la = blocks.mom.chol.topLeftCorner(q, q);
  const Eigen::MatrixXd t_block = blocks.mom.cov.block(0, q, q, b);
  blocks.v = blocks.la.triangularView<Eigen::Lower>().solve(t_block);
  blocks.mu_b = blocks.mom.mean.tail(b);
  return blocks;
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp();
  return e / e.sum();
}

/// Chain gradient accumulators through the joint covariance into query space.
inline Eigen::MatrixXd assemble_joint_gradient(
    const GpModel& model, const Eigen::MatrixXd& x_query,
    const AcquisitionSpec& spec, const Eigen::MatrixXd& sigma_aa_bar,
    const Eigen::MatrixXd& t_bar) {
  const auto q = x_query.rows();
  const auto d = x_query.cols();
  const auto b = spec.discretization.rows();
  Eigen::MatrixXd joint(q + b, d);
  joint.topRows(q) = x_query;
  joint.bottomRows(b) = spec.discretization;

  Eigen::MatrixXd sigma_bar = Eigen::MatrixXd::Zero(q + b, q + b);
  sigma_bar.topLeftCorner(q, q) = sigma_aa_bar;
  sigma_bar.block(0, q, q, b) = 0.5 * t_bar;
  sigma_bar.block(q, 0, b, q) = 0.5 * t_bar.transpose();

  const auto jac = model.input_jacobians(joint, q);
  Eigen::MatrixXd grad(q, d);
  for (Eigen::Index u = 0; u < q; ++u) {
    for (Eigen::Index c = 0; c < d; ++c) {
      grad(u, c) =
          (sigma_bar.array() * jac.dcov[static_cast<std::size_t>(u * d + c)]
                                   .array())
              .sum();
    }
  }
  return grad;
}

}  // namespace detail

/// Concrete (temperature-relaxed) entropy-search value: the negative expected
/// Shannon entropy of softmax-averaged win probabilities over the
/// discretization, conditioned on reparameterized query outcomes.
inline double es_concrete_value(const AcquisitionSpec& spec,
                                const Eigen::MatrixXd& x_query,
                                const GpModel& model, const BaseSamples& z_a,
                                const BaseSamples& z_b) {
  spec.validate();
  if (spec.kind != AcqKind::es) throw ConfigError("es_concrete_value: kind");
  const auto q = x_query.rows();
  const auto b = spec.discretization.rows();
  if (z_a.q() != q || z_b.q() != b) {
    throw InputError("es_concrete_value: base-sample shape mismatch");
  }

  const auto blocks = detail::joint_blocks(x_query, spec, model);
  Eigen::MatrixXd s_cond =
      blocks.mom.cov.block(q, q, b, b) - blocks.v.transpose() * blocks.v;
  s_cond = 0.5 * (s_cond + s_cond.transpose()).eval();
  const Eigen::MatrixXd l_cond = stable_cholesky(s_cond).chol;

  const auto m_outer = z_a.m();
  const auto m_inner = z_b.m();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < m_outer; ++k) {
    const Eigen::VectorXd m_cond =
        blocks.mu_b + blocks.v.transpose() * z_a.z.row(k).transpose();
    Eigen::VectorXd p_bar = Eigen::VectorXd::Zero(b);
    for (Eigen::Index i = 0; i < m_inner; ++i) {
      const Eigen::VectorXd y_b =
          m_cond + l_cond * z_b.z.row(i).transpose();
      p_bar += detail::softmax(y_b / spec.tau);
    }
    p_bar /= static_cast<double>(m_inner);
    double entropy = 0.0;
    for (Eigen::Index j = 0; j < b; ++j) {
      if (p_bar(j) > 0.0) entropy -= p_bar(j) * std::log(p_bar(j));
    }
    acc -= entropy;
  }
  return acc / static_cast<double>(m_outer);
}

/// Gradient of es_concrete_value with respect to the query rows, via
/// reverse-mode accumulation through the conditional moments and both
/// Cholesky factors.
inline Eigen::MatrixXd es_concrete_gradient(const AcquisitionSpec& spec,
                                            const Eigen::MatrixXd& x_query,
                                            const GpModel& model,
                                            const BaseSamples& z_a,
                                            const BaseSamples& z_b) {
  spec.validate();
  if (spec.kind != AcqKind::es) throw ConfigError("es_concrete_gradient: kind");
  const auto q = x_query.rows();
  const auto b = spec.discretization.rows();
  if (z_a.q() != q || z_b.q() != b) {
    throw InputError("es_concrete_gradient: base-sample shape mismatch");
  }

  const auto blocks = detail::joint_blocks(x_query, spec, model);
  Eigen::MatrixXd s_cond =
      blocks.mom.cov.block(q, q, b, b) - blocks.v.transpose() * blocks.v;
  s_cond = 0.5 * (s_cond + s_cond.transpose()).eval();
  const Eigen::MatrixXd l_cond = stable_cholesky(s_cond).chol;

  const auto m_outer = z_a.m();
  const auto m_inner = z_b.m();
  const double inv_outer = 1.0 / static_cast<double>(m_outer);
  const double inv_inner = 1.0 / static_cast<double>(m_inner);

  Eigen::MatrixXd v_bar = Eigen::MatrixXd::Zero(q, b);
  Eigen::MatrixXd l_cond_bar = Eigen::MatrixXd::Zero(b, b);

  std::vector<Eigen::VectorXd> inner_probs(static_cast<std::size_t>(m_inner));
  for (Eigen::Index k = 0; k < m_outer; ++k) {
    const Eigen::VectorXd z_k = z_a.z.row(k).transpose();
    const Eigen::VectorXd m_cond = blocks.mu_b + blocks.v.transpose() * z_k;
    Eigen::VectorXd p_bar = Eigen::VectorXd::Zero(b);
    for (Eigen::Index i = 0; i < m_inner; ++i) {
      const Eigen::VectorXd y_b = m_cond + l_cond * z_b.z.row(i).transpose();
      inner_probs[static_cast<std::size_t>(i)] =
          detail::softmax(y_b / spec.tau);
      p_bar += inner_probs[static_cast<std::size_t>(i)];
    }
    p_bar *= inv_inner;

    // value contribution is -H(p_bar) * inv_outer.
    Eigen::VectorXd g_pbar(b);
    for (Eigen::Index j = 0; j < b; ++j) {
      g_pbar(j) =
          p_bar(j) > 0.0 ? (std::log(p_bar(j)) + 1.0) * inv_outer : 0.0;
    }

    Eigen::VectorXd m_cond_bar = Eigen::VectorXd::Zero(b);
    for (Eigen::Index i = 0; i < m_inner; ++i) {
      const Eigen::VectorXd& p = inner_probs[static_cast<std::size_t>(i)];
      const double inner = g_pbar.dot(p);
      const Eigen::VectorXd g_y =
          (p.array() * (g_pbar.array() - inner)).matrix() *
          (inv_inner / spec.tau);
      m_cond_bar += g_y;
      l_cond_bar += g_y * z_b.z.row(i);
    }
    v_bar += z_k * m_cond_bar.transpose();
  }

  // L_cond -> S_cond -> V.
  const Eigen::MatrixXd s_cond_bar = cholesky_pullback(
      l_cond, l_cond_bar.triangularView<Eigen::Lower>().toDenseMatrix());
  v_bar.noalias() += -2.0 * blocks.v * s_cond_bar;

  // V = La^{-1} T: chain into T and La.
  const Eigen::MatrixXd t_bar =
      blocks.la.transpose().triangularView<Eigen::Upper>().solve(v_bar);
  Eigen::MatrixXd la_bar = -t_bar * blocks.v.transpose();
  la_bar = la_bar.triangularView<Eigen::Lower>().toDenseMatrix();
  const Eigen::MatrixXd sigma_aa_bar = cholesky_pullback(blocks.la, la_bar);

  return detail::assemble_joint_gradient(model, x_query, spec, sigma_aa_bar,
                                         t_bar);
}

/// Knowledge-gradient value: the Monte Carlo average of the best
/// fantasy-updated discretization mean.
inline double kg_value(const AcquisitionSpec& spec,
                       const Eigen::MatrixXd& x_query, const GpModel& model,
                       const BaseSamples& z_a) {
  spec.validate();
  if (spec.kind != AcqKind::kg) throw ConfigError("kg_value: kind");
  const auto q = x_query.rows();
  if (z_a.q() != q) throw InputError("kg_value: base-sample shape mismatch");

  const auto blocks = detail::joint_blocks(x_query, spec, model);
  const auto m = z_a.m();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::VectorXd updated =
        blocks.mu_b + blocks.v.transpose() * z_a.z.row(k).transpose();
    acc += updated.maxCoeff();
  }
  return acc / static_cast<double>(m);
}

/// Gradient of kg_value with respect to the query rows.
inline Eigen::MatrixXd kg_gradient(const AcquisitionSpec& spec,
                                   const Eigen::MatrixXd& x_query,
                                   const GpModel& model,
                                   const BaseSamples& z_a) {
  spec.validate();
  if (spec.kind != AcqKind::kg) throw ConfigError("kg_gradient: kind");
  const auto q = x_query.rows();
  const auto b = spec.discretization.rows();
  if (z_a.q() != q) throw InputError("kg_gradient: shape mismatch");

  const auto blocks = detail::joint_blocks(x_query, spec, model);
  const auto m = z_a.m();
  const double inv_m = 1.0 / static_cast<double>(m);

  Eigen::MatrixXd v_bar = Eigen::MatrixXd::Zero(q, b);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::VectorXd z_k = z_a.z.row(k).transpose();
    const Eigen::VectorXd updated = blocks.mu_b + blocks.v.transpose() * z_k;
    Eigen::Index best = 0;
    updated.maxCoeff(&best);
    v_bar.col(best) += inv_m * z_k;
  }

  const Eigen::MatrixXd t_bar =
      blocks.la.transpose().triangularView<Eigen::Upper>().solve(v_bar);
  Eigen::MatrixXd la_bar = -t_bar * blocks.v.transpose();
  la_bar = la_bar.triangularView<Eigen::Lower>().toDenseMatrix();
  const Eigen::MatrixXd sigma_aa_bar = cholesky_pullback(blocks.la, la_bar);

  return detail::assemble_joint_gradient(model, x_query, spec, sigma_aa_bar,
                                         t_bar);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimator and its sample-path gradient.
// ---------------------------------------------------------------------------

/// Monte Carlo acquisition value at a query set.  Myopic-maximal kinds
/// average the utility of reparameterized outcomes; ES and KG dispatch to
/// their discretized forms (ES derives its inner variates from z.seed).
inline double mc_value(const AcquisitionSpec& spec,
                       const Eigen::MatrixXd& x_query, const GpModel& model,
                       const BaseSamples& z) {
  spec.validate();
  if (spec.kind == AcqKind::es) {
    const auto z_b = draw_base_samples(
        spec.inner_mc_samples, static_cast<int>(spec.discretization.rows()),
        BaseMode::deterministic, derive_seed(z.seed, detail::kEsInnerStream));
    return es_concrete_value(spec, x_query, model, z, z_b);
  }
  if (spec.kind == AcqKind::kg) {
    return kg_value(spec, x_query, model, z);
  }
  const auto mom = model.moments(x_query);
  Eigen::MatrixXd chol_eff = mom.chol;
  if (spec.kind == AcqKind::ucb) {
    chol_eff *= detail::ucb_chol_scale(spec.beta);
  }
  const auto paths = reparameterize(mom.mean, chol_eff, z);
  return utility(spec, paths, mom.mean).values.mean();
}

/// Sample-path gradient of mc_value with respect to the query rows, using
/// the same base samples.  Composes the utility subgradient, the
/// reparameterization, the Cholesky pullback and the posterior input
/// derivatives.
inline Eigen::MatrixXd mc_gradient(const AcquisitionSpec& spec,
                                   const Eigen::MatrixXd& x_query,
                                   const GpModel& model,
                                   const BaseSamples& z) {
  spec.validate();
  if (spec.kind == AcqKind::es) {
    const auto z_b = draw_base_samples(
        spec.inner_mc_samples, static_cast<int>(spec.discretization.rows()),
        BaseMode::deterministic, derive_seed(z.seed, detail::kEsInnerStream));
    return es_concrete_gradient(spec, x_query, model, z, z_b);
  }
  if (spec.kind == AcqKind::kg) {
    return kg_gradient(spec, x_query, model, z);
  }

  const auto q = x_query.rows();
  const auto d = x_query.cols();
  const auto jac = model.input_jacobians(x_query);
  const auto mom = model.moments(x_query);

  const double scale =
      spec.kind == AcqKind::ucb ? detail::ucb_chol_scale(spec.beta) : 1.0;
  Eigen::MatrixXd chol_eff = mom.chol * scale;
  const auto paths = reparameterize(mom.mean, chol_eff, z);
  const auto batch = utility(spec, paths, mom.mean);

  const double inv_m = 1.0 / static_cast<double>(z.m());
  const Eigen::VectorXd mu_bar =
      batch.grad_mu.colwise().sum().transpose() * inv_m;
  // d value / d L_eff = (1/m) sum_k g_k z_k^T, lower triangle only.
  Eigen::MatrixXd chol_bar =
      (batch.grad_y.transpose() * z.z * inv_m * scale)
          .triangularView<Eigen::Lower>()
          .toDenseMatrix();
  const Eigen::MatrixXd sigma_bar = cholesky_pullback(mom.chol, chol_bar);

  Eigen::MatrixXd grad(q, d);
  for (Eigen::Index u = 0; u < q; ++u) {
    for (Eigen::Index c = 0; c < d; ++c) {
      grad(u, c) =
          mu_bar(u) * jac.dmean(u, c) +
          (sigma_bar.array() *
           jac.dcov[static_cast<std::size_t>(u * d + c)].array())
              .sum();
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Closed-form marginal EI and the incremental machinery built on it.
// ---------------------------------------------------------------------------

/// Exact expected improvement of a scalar Gaussian belief over threshold
/// alpha; degenerates to relu(mu - alpha) at zero variance.
inline double marginal_ei_closed_form(double mu, double variance,
                                      double alpha) {
  if (variance < 0.0) throw InputError("marginal_ei_closed_form: variance");
  const double sigma = std::sqrt(variance);
  if (sigma < 1e-12) return relu(mu - alpha);
  const double u = (mu - alpha) / sigma;
  return (mu - alpha) * normal_cdf(u) + sigma * normal_pdf(u);
}

inline double marginal_ei_closed_form(const Eigen::VectorXd& x,
                                      const GpModel& model, double alpha) {
  const auto [mu, var] = model.mean_variance_at(x);
  return marginal_ei_closed_form(mu, var, alpha);
}

/// Gradient of the closed-form marginal EI with respect to x.
inline Eigen::VectorXd marginal_ei_gradient(const Eigen::VectorXd& x,
                                            const GpModel& model,
                                            double alpha) {
  const auto [mu, var] = model.mean_variance_at(x);
  const auto jac = model.input_jacobians(x.transpose());
  const Eigen::VectorXd dmu = jac.dmean.row(0).transpose();
  Eigen::VectorXd dvar(x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    dvar(c) = jac.dcov[static_cast<std::size_t>(c)](0, 0);
  }
  const double sigma = std::sqrt(std::max(var, 0.0));
  if (sigma < 1e-12) {
    return mu > alpha ? dmu : Eigen::VectorXd::Zero(x.size()).eval();
  }
  const double u = (mu - alpha) / sigma;
  // dEI/dmu = Phi(u), dEI/dsigma = phi(u).
  return normal_cdf(u) * dmu + normal_pdf(u) / (2.0 * sigma) * dvar;
}

/// One fantasy-conditioned dataset plus its running incumbent
/// max(alpha_0, fantasized outcomes so far).
struct FantasyState {
  GpModel model;
  double incumbent;
};

/// Average over fantasy states of the closed-form marginal EI at each
/// state's incumbent threshold.
inline double incremental_ei_value(const Eigen::VectorXd& x,
                                   const std::vector<FantasyState>& states) {
  if (states.empty()) {
    throw ConfigError("incremental_ei_value: no fantasy states");
  }
  double acc = 0.0;
  for (const auto& state : states) {
    acc += marginal_ei_closed_form(x, state.model, state.incumbent);
  }
  return acc / static_cast<double>(states.size());
}

inline Eigen::VectorXd incremental_ei_gradient(
    const Eigen::VectorXd& x, const std::vector<FantasyState>& states) {
  if (states.empty()) {
    throw ConfigError("incremental_ei_gradient: no fantasy states");
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(x.size());
  for (const auto& state : states) {
    acc += marginal_ei_gradient(x, state.model, state.incumbent);
  }
  return acc / static_cast<double>(states.size());
}

/// Extends a fantasy state with one hypothesized observation, updating the
/// incumbent.
inline FantasyState extend_state(const FantasyState& state,
                                 const Eigen::VectorXd& x, double y) {
  return {state.model.fantasized(x, y), std::max(state.incumbent, y)};
}

// ---------------------------------------------------------------------------
// Discrete derivative (marginal gain) and normalization offsets.
// ---------------------------------------------------------------------------

/// Lower bound on the pointwise utility over the ground set, used to define
/// max(empty) when normalizing set functions.
struct NormalizationOffset {
  double v_min = 0.0;
};

/// Monte Carlo estimate of the marginal gain
///   Delta(x_new; X_old) = L(X_old + {x_new}) - L(X_old),
/// computed per sample as relu(u_new - max u_old) with max(empty) = v_min.
inline double discrete_derivative_mc(const AcquisitionSpec& spec,
                                     const Eigen::VectorXd& x_new,
                                     const Eigen::MatrixXd& x_old,
                                     const GpModel& model,
                                     const BaseSamples& z,
                                     double v_min = 0.0) {
  if (!is_myopic_maximal(spec.kind)) {
    throw ConfigError("discrete_derivative_mc: myopic-maximal kinds only");
  }
  spec.validate();
  const auto p = x_old.rows();
  Eigen::MatrixXd joint(p + 1, x_new.size());
  if (p > 0) joint.topRows(p) = x_old;
  joint.bottomRows(1) = x_new.transpose();
  if (z.q() != p + 1) {
    throw InputError("discrete_derivative_mc: base-sample shape mismatch");
  }

  const auto mom = model.moments(joint);
  Eigen::MatrixXd chol_eff = mom.chol;
  if (spec.kind == AcqKind::ucb) {
    chol_eff *= detail::ucb_chol_scale(spec.beta);
  }
  const auto paths = reparameterize(mom.mean, chol_eff, z);

  double acc = 0.0;
  for (Eigen::Index k = 0; k < z.m(); ++k) {
    // max(empty) = v_min; a non-empty old set uses its own maximum.
    double old_max =
        p == 0 ? v_min : -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < p; ++j) {
      old_max = std::max(old_max, detail::pointwise_utility(
                                      spec, paths.y(k, j), mom.mean(j)));
    }
    const double u_new =
        detail::pointwise_utility(spec, paths.y(k, p), mom.mean(p));
    acc += relu(u_new - old_max);
  }
  return acc / static_cast<double>(z.m());
}

/// Kind-specific lower bound on pointwise utility over a candidate grid.
/// EI and PI are normalized by construction; UCB is bounded by the smallest
/// posterior mean; SR uses a sampled heuristic bound (min sampled path minus
/// three posterior standard deviations), which has no hard guarantee.
inline NormalizationOffset normalization_offset(
    const AcquisitionSpec& spec, const GpModel& model,
    const Eigen::MatrixXd& grid, std::uint64_t seed = 0) {
  switch (spec.kind) {
    case AcqKind::ei:
    case AcqKind::pi:
      return {0.0};
    case AcqKind::ucb: {
      if (grid.rows() == 0) {
        throw ConfigError("normalization_offset: UCB needs a grid");
      }
      double v = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        v = std::min(v, model.mean_at(grid.row(i).transpose()));
      }
      return {v};
    }
    case AcqKind::sr: {
      if (grid.rows() == 0) {
        throw ConfigError("normalization_offset: SR needs a grid");
      }
      const CounterRng rng(derive_seed(seed, 0x5352ULL));
      double v = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        const auto [mu, var] = model.mean_variance_at(grid.row(i).transpose());
        const double sd = std::sqrt(std::max(var, 0.0));
        double low = mu;
        for (int k = 0; k < std::max(1, spec.mc_samples); ++k) {
          low = std::min(
              low, mu + sd * rng.normal(static_cast<std::uint64_t>(
                               i * spec.mc_samples + k)));
        }
        v = std::min(v, low - 3.0 * sd);
      }
      return {v};
    }
    default:
      throw ConfigError("normalization_offset: myopic-maximal kinds only");
  }
}

}  // namespace qacq

#endif  // QACQ_ACQUISITIONS_HPP
