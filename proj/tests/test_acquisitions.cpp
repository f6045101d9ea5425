#include <catch2/catch.hpp>

#include <Eigen/Dense>

#include "qacq/acquisitions.hpp"
#include "qacq/gp.hpp"
#include "qacq/oracles.hpp"
#include "qacq/rng.hpp"

using namespace qacq;

namespace {

Dataset random_dataset(int n, int d, std::uint64_t seed) {
  const CounterRng rng(seed);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.uniform(i * d + j);
    y(i) = rng.normal(5000 + i);
  }
  return Dataset(x, y);
}

Eigen::MatrixXd random_query(int q, int d, std::uint64_t seed) {
  const CounterRng rng(seed);
  Eigen::MatrixXd x(q, d);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = 0.05 + 0.9 * rng.uniform(i * d + j);
  return x;
}

GpModel small_model(int d, std::uint64_t seed, double noise = 1e-3) {
  return GpModel(random_dataset(6, d, seed),
                 Hyperparams::isotropic(d, 0.4, 1.0, noise, 0.0));
}

BaseSamples zero_samples(int m, int q) {
  BaseSamples z;
  z.z = Eigen::MatrixXd::Zero(m, q);
  z.mode = BaseMode::deterministic;
  z.seed = 0;
  return z;
}

}  // namespace

TEST_CASE("EI utility is the max of rectified improvements", "[acq]") {
  AcquisitionSpec spec;
  spec.kind = AcqKind::ei;
  spec.alpha = 0.0;
  SamplePaths paths;
  paths.y.resize(1, 2);
  paths.y << 1.0, -1.0;
  const auto batch = utility(spec, paths, Eigen::VectorXd::Zero(2));
  REQUIRE(batch.values(0) == 1.0);
  REQUIRE(batch.grad_y(0, 0) == 1.0);
  REQUIRE(batch.grad_y(0, 1) == 0.0);
}

TEST_CASE("SR utility is the plain max", "[acq]") {
  AcquisitionSpec spec;
  spec.kind = AcqKind::sr;
  SamplePaths paths;
  paths.y.resize(1, 2);
  paths.y << 0.3, 0.7;
  const auto batch = utility(spec, paths, Eigen::VectorXd::Zero(2));
  REQUIRE(batch.values(0) == 0.7);
  REQUIRE(batch.grad_y(0, 1) == 1.0);
}

TEST_CASE("PI utility sharpens to the indicator as tau shrinks", "[acq]") {
  AcquisitionSpec spec;
  spec.kind = AcqKind::pi;
  spec.alpha = 0.2;
  spec.tau = 1e-6;
  SamplePaths paths;
  paths.y.resize(1, 1);
  paths.y << spec.alpha + 0.5;
  const auto batch = utility(spec, paths, Eigen::VectorXd::Zero(1));
  REQUIRE(batch.values(0) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("utility rejects ES and KG kinds", "[acq]") {
  AcquisitionSpec spec;
  spec.kind = AcqKind::es;
  spec.discretization = Eigen::MatrixXd::Zero(2, 1);
  SamplePaths paths;
  paths.y.resize(1, 1);
  paths.y << 0.0;
  REQUIRE_THROWS_AS(utility(spec, paths, Eigen::VectorXd::Zero(1)),
                    ConfigError);
}

TEST_CASE("marginal UCB Monte Carlo recovers mu + sqrt(beta) sigma", "[acq]") {
  // One query point: the expectation of max over a single coordinate is
  // the closed-form confidence bound.
  const double mu = 0.4, sigma = 0.8;
  for (const double beta : {1.0, 2.0, 4.0}) {
    AcquisitionSpec spec;
    spec.kind = AcqKind::ucb;
    spec.beta = beta;
    const auto z = draw_base_samples(1 << 16, 1, BaseMode::deterministic, 31);
    Eigen::MatrixXd chol(1, 1);
    chol << sigma * detail::ucb_chol_scale(beta);
    const auto paths =
        reparameterize(Eigen::VectorXd::Constant(1, mu), chol, z);
    const auto batch =
        utility(spec, paths, Eigen::VectorXd::Constant(1, mu));
    const double estimate = batch.values.mean();
    const double analytic = mu + std::sqrt(beta) * sigma;
    const double se = std::sqrt(
        (batch.values.array() - estimate).square().mean() / batch.values.size());
    REQUIRE(std::abs(estimate - analytic) < 3.0 * se);
  }
}

TEST_CASE("q=1 Monte Carlo EI agrees with the closed form", "[acq]") {
  const auto model = small_model(2, 40);
  AcquisitionSpec spec;
  spec.kind = AcqKind::ei;
  spec.alpha = 0.3;
  const auto x = random_query(1, 2, 41);
  const auto z = draw_base_samples(1 << 14, 1, BaseMode::deterministic, 42);
  const double mc = mc_value(spec, x, model, z);
  const double analytic =
      marginal_ei_closed_form(x.row(0).transpose(), model, spec.alpha);

  const auto mom = model.moments(x);
  const auto paths = reparameterize(mom.mean, mom.chol, z);
  const auto batch = utility(spec, paths, mom.mean);
  const double se = std::sqrt(
      (batch.values.array() - mc).square().mean() / batch.values.size());
  // Tiny absolute slack covers the jitter spent when the posterior at x is
  // nearly deterministic.
  REQUIRE(std::abs(mc - analytic) < 4.0 * se + 1e-6);
}

TEST_CASE("EI collapses to relu(mu - alpha) at vanishing variance", "[acq]") {
  AcquisitionSpec spec;
  spec.kind = AcqKind::ei;
  spec.alpha = 0.1;
  const double mu = 0.6;
  Eigen::MatrixXd chol(1, 1);
  chol << 1e-9;
  const auto z = draw_base_samples(512, 1, BaseMode::deterministic, 5);
  const auto paths = reparameterize(Eigen::VectorXd::Constant(1, mu), chol, z);
  const auto batch = utility(spec, paths, Eigen::VectorXd::Constant(1, mu));
  REQUIRE(batch.values.mean() == Approx(relu(mu - spec.alpha)).margin(1e-6));
}

TEST_CASE("deterministic base samples give deterministic values", "[acq]") {
  const auto model = small_model(2, 43);
  AcquisitionSpec spec;
  spec.kind = AcqKind::ei;
  const auto x = random_query(2, 2, 44);
  const auto z1 = draw_base_samples(256, 2, BaseMode::deterministic, 45);
  const auto z2 = draw_base_samples(256, 2, BaseMode::deterministic, 45);
  REQUIRE(mc_value(spec, x, model, z1) == mc_value(spec, x, model, z2));
}

TEST_CASE("mc_gradient matches finite differences for MM kinds", "[acq]") {
  const std::vector<AcqKind> kinds{AcqKind::ei, AcqKind::pi, AcqKind::sr,
                                   AcqKind::ucb};
  int config = 0;
  for (const auto kind : kinds) {
    for (std::uint64_t seed = 0; seed < 3; ++seed, ++config) {
      const int d = 1 + static_cast<int>(seed % 3);
      const int q = 1 + static_cast<int>((seed + 1) % 3);
      const auto model = small_model(d, 60 + seed);
      AcquisitionSpec spec;
      spec.kind = kind;
      spec.alpha = 0.1;
      spec.tau = 0.05;
      const auto x = random_query(q, d, 70 + config);
      const auto z = draw_base_samples(64, q, BaseMode::deterministic,
                                       80 + config);
      const auto grad = mc_gradient(spec, x, model, z);
      const auto fd = finite_difference_gradient(
          [&](const Eigen::MatrixXd& xq) {
            return mc_value(spec, xq, model, z);
          },
          x, 1e-5);
      REQUIRE(gradient_relative_error(grad, fd) < 1e-3);
    }
  }
}

TEST_CASE("gradient is zero on a flat utility region", "[acq]") {
  const auto model = small_model(2, 90);
  AcquisitionSpec spec;
  spec.kind = AcqKind::ei;
  spec.alpha = 100.0;  // far above every sampled outcome
  const auto x = random_query(2, 2, 91);
  const auto z = draw_base_samples(128, 2, BaseMode::deterministic, 92);
  const auto grad = mc_gradient(spec, x, model, z);
  REQUIRE(grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("SR gradients mirror under coordinate swap", "[acq]") {
  // Symmetric prior and a mirrored two-point query.  The Cholesky factor is
  // not permutation-covariant, so the mirror holds in expectation rather
  // than per sample; compare mirrored components at large m.
  const GpModel model(Dataset(1), Hyperparams::isotropic(1, 0.3, 1.0, 0.0));
  AcquisitionSpec spec;
  spec.kind = AcqKind::sr;
  Eigen::MatrixXd x(2, 1);
  x << 0.3, 0.7;
  Eigen::MatrixXd x_swapped(2, 1);
  x_swapped << 0.7, 0.3;

  const auto z = draw_base_samples(1 << 16, 2, BaseMode::deterministic, 93);
  BaseSamples z_swapped = z;
  z_swapped.z.col(0).swap(z_swapped.z.col(1));

  const auto g = mc_gradient(spec, x, model, z);
  const auto g_swapped = mc_gradient(spec, x_swapped, model, z_swapped);
  REQUIRE(g(0, 0) == Approx(g_swapped(1, 0)).margin(0.02));
  REQUIRE(g(1, 0) == Approx(g_swapped(0, 0)).margin(0.02));
}

TEST_CASE("ES with one discretization point is exactly zero", "[acq][es]") {
  const auto model = small_model(2, 100);
  AcquisitionSpec spec;
  spec.kind = AcqKind::es;
  spec.discretization = random_query(1, 2, 101);
  const auto x = random_query(2, 2, 102);
  const auto z_a = draw_base_samples(32, 2, BaseMode::deterministic, 103);
  const auto z_b = draw_base_samples(16, 1, BaseMode::deterministic, 104);
  REQUIRE(es_concrete_value(spec, x, model, z_a, z_b) == 0.0);
}

TEST_CASE("ES flattens to -log(b) at high temperature", "[acq][es]") {
  const auto model = small_model(2, 105);
  AcquisitionSpec spec;
  spec.kind = AcqKind::es;
  spec.tau = 1e3;
  spec.discretization = random_query(6, 2, 106);
  const auto x = random_query(2, 2, 107);
  const auto z_a = draw_base_samples(32, 2, BaseMode::deterministic, 108);
  const auto z_b = draw_base_samples(32, 6, BaseMode::deterministic, 109);
  const double value = es_concrete_value(spec, x, model, z_a, z_b);
  REQUIRE(value == Approx(-std::log(6.0)).epsilon(1e-4));
}

TEST_CASE("ES gradient matches finite differences", "[acq][es]") {
  const auto model = small_model(2, 110);
  AcquisitionSpec spec;
  spec.kind = AcqKind::es;
  spec.tau = 0.01;
  spec.inner_mc_samples = 16;
  spec.discretization = random_query(8, 2, 111);
  const auto x = random_query(2, 2, 112);
  const auto z_a = draw_base_samples(32, 2, BaseMode::deterministic, 113);
  const auto z_b = draw_base_samples(16, 8, BaseMode::deterministic, 114);

  const auto grad = es_concrete_gradient(spec, x, model, z_a, z_b);
  const auto fd = finite_difference_gradient(
      [&](const Eigen::MatrixXd& xq) {
        return es_concrete_value(spec, xq, model, z_a, z_b);
      },
      x, 1e-5);
  REQUIRE(gradient_relative_error(grad, fd) < 1e-2);
}

TEST_CASE("KG with zero variates returns the best reference mean",
          "[acq][kg]") {
  const auto model = small_model(2, 120);
  AcquisitionSpec spec;
  spec.kind = AcqKind::kg;
  spec.discretization = random_query(5, 2, 121);
  const auto x = random_query(2, 2, 122);
  const auto z = zero_samples(16, 2);

  double best_mean = -1e300;
  for (int j = 0; j < 5; ++j) {
    best_mean = std::max(
        best_mean, model.mean_at(spec.discretization.row(j).transpose()));
  }
  REQUIRE(kg_value(spec, x, model, z) == Approx(best_mean).margin(1e-12));
}

TEST_CASE("KG against direct quadrature at q=1, b=2", "[acq][kg]") {
  const auto model = small_model(1, 123);
  AcquisitionSpec spec;
  spec.kind = AcqKind::kg;
  spec.discretization = random_query(2, 1, 124);
  const auto x = random_query(1, 1, 125);

  // Reference: integrate max(mu_b + c z) over the standard normal with the
  // trapezoid rule on [-8, 8].
  Eigen::MatrixXd joint(3, 1);
  joint.topRows(1) = x;
  joint.bottomRows(2) = spec.discretization;
  const auto mom = model.moments(joint);
  const double la = mom.chol(0, 0);
  Eigen::VectorXd c(2);
  c(0) = mom.cov(1, 0) / (la * la) * la;
  c(1) = mom.cov(2, 0) / (la * la) * la;
  const Eigen::VectorXd mu_b = mom.mean.tail(2);

  const int nodes = 10000;
  double quad = 0.0;
  const double lo = -8.0, hi = 8.0;
  const double step = (hi - lo) / nodes;
  for (int i = 0; i <= nodes; ++i) {
    const double zv = lo + i * step;
    const double fx =
        std::max(mu_b(0) + c(0) * zv, mu_b(1) + c(1) * zv) * normal_pdf(zv);
    quad += (i == 0 || i == nodes) ? 0.5 * fx : fx;
  }
  quad *= step;

  const auto z = draw_base_samples(1 << 14, 1, BaseMode::deterministic, 126);
  const double mc = kg_value(spec, x, model, z);

  // Standard error of the Monte Carlo side.
  Eigen::VectorXd vals(z.m());
  for (Eigen::Index k = 0; k < z.m(); ++k) {
    const double zv = z.z(k, 0);
    vals(k) = std::max(mu_b(0) + c(0) * zv, mu_b(1) + c(1) * zv);
  }
  const double se =
      std::sqrt((vals.array() - vals.mean()).square().mean() / vals.size());
  REQUIRE(std::abs(mc - quad) < 3.0 * se + 1e-6);
}

TEST_CASE("KG gradient matches finite differences", "[acq][kg]") {
  const auto model = small_model(2, 130);
  AcquisitionSpec spec;
  spec.kind = AcqKind::kg;
  spec.discretization = random_query(6, 2, 131);
  const auto x = random_query(2, 2, 132);
  const auto z = draw_base_samples(64, 2, BaseMode::deterministic, 133);

  const auto grad = kg_gradient(spec, x, model, z);
  const auto fd = finite_difference_gradient(
      [&](const Eigen::MatrixXd& xq) { return kg_value(spec, xq, model, z); },
      x, 1e-5);
  REQUIRE(gradient_relative_error(grad, fd) < 1e-3);
}

TEST_CASE("closed-form EI values", "[acq]") {
  REQUIRE(marginal_ei_closed_form(0.0, 1.0, 0.0) ==
          Approx(0.3989422804014327).epsilon(1e-12));
  REQUIRE(marginal_ei_closed_form(2.5, 0.0, 0.5) == Approx(2.0));
  // Vanishing tail: decreasing mu drives EI monotonically to zero.
  double prev = marginal_ei_closed_form(-0.5, 0.01, 0.0);
  for (double mu = -1.0; mu > -4.0; mu -= 0.5) {
    const double v = marginal_ei_closed_form(mu, 0.01, 0.0);
    REQUIRE(v < prev);
    prev = v;
  }
  REQUIRE(prev < 1e-8);
}

TEST_CASE("incremental EI honors per-state incumbents", "[acq]") {
  const auto model = small_model(2, 140);
  const Eigen::VectorXd x = random_query(1, 2, 141).row(0).transpose();
  const double alpha0 = 0.2;

  // No fantasy outcome above alpha0: thresholds stay at alpha0.
  std::vector<FantasyState> states;
  states.push_back({model.fantasized(random_query(1, 2, 142).row(0).transpose(),
                                     alpha0 - 0.5),
                    alpha0});
  states.push_back({model.fantasized(random_query(1, 2, 143).row(0).transpose(),
                                     alpha0 - 0.8),
                    alpha0});
  double expected = 0.0;
  for (const auto& s : states) {
    expected += marginal_ei_closed_form(x, s.model, alpha0);
  }
  expected /= 2.0;
  REQUIRE(incremental_ei_value(x, states) == Approx(expected).epsilon(1e-12));

  // A fantasy above alpha0 raises that state's threshold.
  const Eigen::VectorXd x1 = random_query(1, 2, 144).row(0).transpose();
  const double y1 = alpha0 + 0.7;
  FantasyState raised{model, alpha0};
  raised = extend_state(raised, x1, y1);
  REQUIRE(raised.incumbent == Approx(y1));
  REQUIRE(incremental_ei_value(x, {raised}) ==
          Approx(marginal_ei_closed_form(x, raised.model, y1)).epsilon(1e-12));

  REQUIRE_THROWS_AS(incremental_ei_value(x, {}), ConfigError);
}

TEST_CASE("marginal EI gradient matches finite differences", "[acq]") {
  const auto model = small_model(2, 150);
  const Eigen::VectorXd x = random_query(1, 2, 151).row(0).transpose();
  const double alpha = 0.1;
  const Eigen::VectorXd grad = marginal_ei_gradient(x, model, alpha);
  const auto fd = finite_difference_gradient(
      [&](const Eigen::MatrixXd& xq) {
        return marginal_ei_closed_form(xq.row(0).transpose(), model, alpha);
      },
      x.transpose(), 1e-6);
  REQUIRE((grad - fd.row(0).transpose()).norm() <
          1e-4 * std::max(1.0, fd.norm()));
}

TEST_CASE("discrete derivative telescopes against joint values", "[acq]") {
  for (const auto kind : {AcqKind::ei, AcqKind::ucb, AcqKind::sr}) {
    const auto model = small_model(2, 160);
    AcquisitionSpec spec;
    spec.kind = kind;
    spec.alpha = 0.0;
    const auto x_old = random_query(2, 2, 161);
    const Eigen::VectorXd x_new = random_query(1, 2, 162).row(0).transpose();
    const auto z = draw_base_samples(128, 3, BaseMode::deterministic, 163);

    Eigen::MatrixXd joint(3, 2);
    joint.topRows(2) = x_old;
    joint.row(2) = x_new.transpose();

    BaseSamples z_old;
    z_old.z = z.z.leftCols(2);
    z_old.mode = z.mode;
    z_old.seed = z.seed;

    const double delta = discrete_derivative_mc(spec, x_new, x_old, model, z);
    const double diff =
        mc_value(spec, joint, model, z) - mc_value(spec, x_old, model, z_old);
    REQUIRE(delta == Approx(diff).margin(1e-10));
  }
}

TEST_CASE("discrete derivative of a duplicated point is negligible", "[acq]") {
  const auto model = small_model(2, 170);
  AcquisitionSpec spec;
  spec.kind = AcqKind::ei;
  const auto x_old = random_query(2, 2, 171);
  const Eigen::VectorXd x_new = x_old.row(1).transpose();
  const auto z = draw_base_samples(256, 3, BaseMode::deterministic, 172);
  REQUIRE(discrete_derivative_mc(spec, x_new, x_old, model, z) < 1e-4);
}

TEST_CASE("discrete derivative with an empty old set is the normalized value",
          "[acq]") {
  const auto model = small_model(2, 180);
  AcquisitionSpec spec;
  spec.kind = AcqKind::ei;
  const Eigen::VectorXd x_new = random_query(1, 2, 181).row(0).transpose();
  const auto z = draw_base_samples(256, 1, BaseMode::deterministic, 182);
  const double delta = discrete_derivative_mc(
      spec, x_new, Eigen::MatrixXd(0, 2), model, z, /*v_min=*/0.0);
  REQUIRE(delta == Approx(mc_value(spec, x_new.transpose(), model, z))
                       .margin(1e-12));
}

TEST_CASE("normalization offsets by kind", "[acq]") {
  AcquisitionSpec spec;
  spec.kind = AcqKind::ei;
  const GpModel prior(Dataset(2), Hyperparams::isotropic(2, 0.4, 1.0, 0.0));
  const auto grid = random_query(16, 2, 190);
  REQUIRE(normalization_offset(spec, prior, grid).v_min == 0.0);
  spec.kind = AcqKind::pi;
  REQUIRE(normalization_offset(spec, prior, grid).v_min == 0.0);
  spec.kind = AcqKind::ucb;
  REQUIRE(normalization_offset(spec, prior, grid).v_min == 0.0);
  spec.kind = AcqKind::sr;
  REQUIRE(normalization_offset(spec, prior, grid).v_min < 0.0);
}

TEST_CASE("estimator stability between m and 4m", "[acq]") {
  const auto model = small_model(2, 200);
  AcquisitionSpec spec;
  spec.kind = AcqKind::ei;
  spec.alpha = 0.2;
  const auto x = random_query(2, 2, 201);

  const auto eval = [&](int m, std::uint64_t seed) {
    const auto z = draw_base_samples(m, 2, BaseMode::deterministic, seed);
    const auto mom = model.moments(x);
    const auto paths = reparameterize(mom.mean, mom.chol, z);
    const auto batch = utility(spec, paths, mom.mean);
    const double mean = batch.values.mean();
    const double se = std::sqrt(
        (batch.values.array() - mean).square().mean() / batch.values.size());
    return std::pair<double, double>{mean, se};
  };

  const auto [v1, se1] = eval(1 << 12, 202);
  const auto [v2, se2] = eval(1 << 14, 203);
  REQUIRE(std::abs(v1 - v2) < 3.0 * std::sqrt(se1 * se1 + se2 * se2));
}

TEST_CASE("parallel UCB dominates its marginals", "[acq]") {
  const auto model = small_model(2, 210);
  AcquisitionSpec spec;
  spec.kind = AcqKind::ucb;
  spec.beta = 2.0;
  const auto x = random_query(2, 2, 211);
  const auto z = draw_base_samples(1 << 14, 2, BaseMode::deterministic, 212);
  const double joint = mc_value(spec, x, model, z);

  for (int j = 0; j < 2; ++j) {
    const auto [mu, var] = model.mean_variance_at(x.row(j).transpose());
    const double marginal = mu + std::sqrt(spec.beta * var);
    // 3-sigma slack on the joint estimator.
    REQUIRE(joint > marginal - 0.02);
  }
}
