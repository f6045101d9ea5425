#include <catch2/catch.hpp>

#include <future>

#include "qacq/harness.hpp"
#include "qacq/lowdisc.hpp"
#include "qacq/maximizers.hpp"
#include "qacq/oracles.hpp"

using namespace qacq;

TEST_CASE("dataset validation rejects malformed inputs", "[types]") {
  Eigen::MatrixXd x(2, 2);
  x << 0.1, 0.2, 0.3, 0.4;
  Eigen::VectorXd y(3);
  y.setZero();
  REQUIRE_THROWS_AS(Dataset(x, y), InputError);

  Eigen::MatrixXd outside(1, 2);
  outside << 1.5, 0.2;
  Eigen::VectorXd y1(1);
  y1 << 0.0;
  REQUIRE_THROWS_AS(Dataset(outside, y1), InputError);

  REQUIRE_THROWS_AS(Dataset(0), InputError);
}

TEST_CASE("hyperparameter validation", "[types]") {
  Hyperparams hp;
  hp.lengthscales = Eigen::VectorXd::Constant(2, 0.5);
  hp.signal_variance = 0.0;
  REQUIRE_THROWS_AS(hp.validate(), ConfigError);
  hp.signal_variance = 1.0;
  hp.noise_variance = -1e-9;
  REQUIRE_THROWS_AS(hp.validate(), ConfigError);
  hp.noise_variance = 0.0;
  REQUIRE_NOTHROW(hp.validate());
}

TEST_CASE("low discrepancy points fill the cube deterministically",
          "[lowdisc]") {
  const auto a = low_discrepancy_points(128, 3, 5);
  const auto b = low_discrepancy_points(128, 3, 5);
  REQUIRE(a == b);
  REQUIRE(a.minCoeff() >= 0.0);
  REQUIRE(a.maxCoeff() < 1.0);
  // Each coordinate roughly covers the range.
  for (int c = 0; c < 3; ++c) {
    REQUIRE(a.col(c).minCoeff() < 0.1);
    REQUIRE(a.col(c).maxCoeff() > 0.9);
  }
  REQUIRE(low_discrepancy_points(128, 3, 6) != a);
}

TEST_CASE("duplicate query rows are separated inside the box", "[max]") {
  const Box bounds = Box::unit(2);
  Eigen::MatrixXd x(3, 2);
  x << 1.0, 1.0, 1.0, 1.0, 1.0, 1.0;  // all on the same corner
  const auto separated = detail::separate_duplicate_rows(x, bounds);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      REQUIRE((separated.row(i) - separated.row(j)).norm() > 1e-9);
    }
  }
  REQUIRE(separated.minCoeff() >= 0.0);
  REQUIRE(separated.maxCoeff() <= 1.0);

  // Distinct rows pass through untouched.
  Eigen::MatrixXd clean(2, 2);
  clean << 0.2, 0.3, 0.7, 0.8;
  REQUIRE(detail::separate_duplicate_rows(clean, bounds) == clean);
}

TEST_CASE("concurrent trials match sequential execution", "[harness]") {
  RunConfig cfg;
  cfg.task.type = "synthetic";
  cfg.task.dim = 2;
  cfg.task.n_basis = 64;
  cfg.task.true_max = TrueMaxConfig{64, 4, 10, 0.02};
  cfg.q = 1;
  cfg.acq.mc_samples = 32;
  cfg.maximizer.n_starts = 2;
  cfg.surrogate = SurrogateMode::known_prior;
  cfg.n_iterations = 2;
  cfg.inner_budget = 16;
  cfg.seed = 9;

  auto f0 = std::async(std::launch::async, [&] { return run_trial(cfg, 0); });
  auto f1 = std::async(std::launch::async, [&] { return run_trial(cfg, 1); });
  const auto parallel0 = f0.get();
  const auto parallel1 = f1.get();
  const auto serial0 = run_trial(cfg, 0);
  const auto serial1 = run_trial(cfg, 1);

  REQUIRE(parallel0.rows.size() == serial0.rows.size());
  for (std::size_t i = 0; i < serial0.rows.size(); ++i) {
    REQUIRE(parallel0.rows[i].best_observed == serial0.rows[i].best_observed);
    REQUIRE(parallel0.rows[i].acq_value == serial0.rows[i].acq_value);
  }
  for (std::size_t i = 0; i < serial1.rows.size(); ++i) {
    REQUIRE(parallel1.rows[i].best_observed == serial1.rows[i].best_observed);
  }
}

TEST_CASE("concrete relaxations approach hard indicators", "[acq][slow]") {
  const auto report = check_concrete_limits(3);
  INFO(report.metric);
  REQUIRE(report.pass);
}

TEST_CASE("regret slack holds on seeded synthetic runs", "[tasks]") {
  const auto task =
      sample_matern_task(2, 256, 21, TrueMaxConfig{1024, 32, 40, 0.02});
  ObservationChannel channel{1e-3, 3, 0};
  const CounterRng rng(8);
  double best = -1e300;
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x(2);
    x << rng.uniform(2 * i), rng.uniform(2 * i + 1);
    best = std::max(best, observe(task, x, channel));
  }
  REQUIRE(task.true_max - best >= -3.0 * std::sqrt(1e-3));
}
