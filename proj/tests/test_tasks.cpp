#include <catch2/catch.hpp>

#include <Eigen/Dense>

#include "qacq/kernel.hpp"
#include "qacq/tasks.hpp"

using namespace qacq;

namespace {

const TrueMaxConfig kCheapMax{64, 4, 20, 0.02};

/// Average feature-space covariance over tasks on a grid: for fixed
/// frequencies and phases the weights are standard normal, so the exact
/// covariance of f is the feature inner product.
Eigen::MatrixXd mean_feature_covariance(int n_tasks, int n_basis,
                                        const Eigen::MatrixXd& grid,
                                        bool gaussian_spectrum) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(grid.rows(), grid.rows());
  for (int t = 0; t < n_tasks; ++t) {
    const auto task = sample_matern_task(1, n_basis, 1000 + t, kCheapMax,
                                         gaussian_spectrum);
    const Eigen::MatrixXd phase =
        (grid * task.frequencies.transpose()).rowwise() +
        task.phases.transpose();
    const Eigen::MatrixXd features =
        std::sqrt(2.0 / n_basis) * phase.array().cos().matrix();
    acc += features * features.transpose();
  }
  return acc / n_tasks;
}

}  // namespace

TEST_CASE("same seed reproduces the task bit for bit", "[tasks]") {
  const auto a = sample_matern_task(2, 64, 9, kCheapMax);
  const auto b = sample_matern_task(2, 64, 9, kCheapMax);
  REQUIRE(a.frequencies == b.frequencies);
  REQUIRE(a.phases == b.phases);
  REQUIRE(a.weights == b.weights);
  REQUIRE(a.true_max == b.true_max);
}

TEST_CASE("RFF covariance matches the Matern-5/2 kernel", "[tasks][slow]") {
  const int grid_n = 32;
  Eigen::MatrixXd grid(grid_n, 1);
  for (int i = 0; i < grid_n; ++i) grid(i, 0) = i / (grid_n - 1.0);

  const Eigen::MatrixXd emp =
      mean_feature_covariance(64, 1 << 14, grid, false);
  const auto hp = Hyperparams::isotropic(1, 0.25, 1.0, 0.0);
  const Eigen::MatrixXd kernel = matern52_cross_covariance(grid, grid, hp);
  REQUIRE((emp - kernel).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("Gaussian spectrum reduces to the squared exponential",
          "[tasks][slow]") {
  const int grid_n = 16;
  Eigen::MatrixXd grid(grid_n, 1);
  for (int i = 0; i < grid_n; ++i) grid(i, 0) = i / (grid_n - 1.0);

  const Eigen::MatrixXd emp =
      mean_feature_covariance(64, 1 << 13, grid, true);
  Eigen::MatrixXd kernel(grid_n, grid_n);
  const double ls = 0.25;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double r = (grid(i, 0) - grid(j, 0)) / ls;
      kernel(i, j) = std::exp(-0.5 * r * r);
    }
  }
  REQUIRE((emp - kernel).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("task evaluation basics", "[tasks]") {
  auto task = sample_matern_task(2, 8, 5, kCheapMax);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(2, 0.4);

  SyntheticTask zeroed = task;
  zeroed.weights.setZero();
  REQUIRE(evaluate_task(zeroed, x) == 0.0);

  SyntheticTask single = task;
  single.frequencies = Eigen::MatrixXd::Zero(1, 2);
  single.phases = Eigen::VectorXd::Zero(1);
  single.weights = Eigen::VectorXd::Constant(1, 0.7);
  single.amplitude = 1.3;
  // Zero frequency and phase: a constant equal to the scaled weight.
  const double expected = 1.3 * std::sqrt(2.0) * 0.7;
  REQUIRE(evaluate_task(single, x) == Approx(expected));
  REQUIRE(evaluate_task(single, Eigen::VectorXd::Constant(2, 0.9)) ==
          Approx(expected));

  SyntheticTask doubled = task;
  doubled.weights *= 2.0;
  REQUIRE(evaluate_task(doubled, x) ==
          Approx(2.0 * evaluate_task(task, x)).epsilon(1e-12));

  REQUIRE_THROWS_AS(evaluate_task(task, Eigen::VectorXd::Constant(2, 1.5)),
                    InputError);
}

TEST_CASE("task gradient matches finite differences", "[tasks]") {
  const auto task = sample_matern_task(3, 32, 6, kCheapMax);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.43);
  const Eigen::VectorXd grad = task_gradient(task, x);
  const double h = 1e-6;
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd up = x, dn = x;
    up(c) += h;
    dn(c) -= h;
    const double fd = (evaluate_task(task, up) - evaluate_task(task, dn)) /
                      (2.0 * h);
    REQUIRE(grad(c) == Approx(fd).epsilon(1e-5).margin(1e-8));
  }
}

TEST_CASE("true max dominates probed values", "[tasks]") {
  const auto task = sample_matern_task(2, 128, 7, TrueMaxConfig{512, 16, 40, 0.02});
  const Eigen::MatrixXd probes = low_discrepancy_points(256, 2, 99);
  const Eigen::VectorXd values = evaluate_task_batch(task, probes);
  REQUIRE(task.true_max >= values.maxCoeff() - 1e-12);
}

TEST_CASE("observation channel noise behaves", "[tasks]") {
  const auto task = sample_matern_task(1, 32, 8, kCheapMax);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.3);
  const double fx = evaluate_task(task, x);

  ObservationChannel noiseless{0.0, 4, 0};
  REQUIRE(observe(task, x, noiseless) == fx);

  ObservationChannel channel{1e-3, 4, 0};
  const int n = 10000;
  Eigen::VectorXd obs(n);
  for (int i = 0; i < n; ++i) obs(i) = observe(task, x, channel);
  const double mean = obs.mean();
  const double var = (obs.array() - mean).square().mean();
  REQUIRE(std::abs(var - 1e-3) < 0.2e-3);

  ObservationChannel a{1e-3, 1, 0}, b{1e-3, 2, 0};
  REQUIRE(observe(task, x, a) != observe(task, x, b));

  // (seed, index) fully determines the draw.
  ObservationChannel c{1e-3, 4, 0};
  REQUIRE(observe(task, x, c) == obs(0));
}

TEST_CASE("branin checks out at a canonical minimizer", "[tasks]") {
  // Native minimizer (pi, 2.275) mapped onto the unit square.
  Eigen::VectorXd x(2);
  x << (kPi + 5.0) / 15.0, 2.275 / 15.0;
  const double native = detail::branin_native(kPi, 2.275);
  REQUIRE(native == Approx(0.39788735772973816).epsilon(1e-9));
  REQUIRE(benchmark_value(BenchmarkName::branin, x) ==
          Approx(-0.39788735772973816).epsilon(1e-9));
  REQUIRE(benchmark_optimum(BenchmarkName::branin) ==
          Approx(-0.39788735772973816));
}

TEST_CASE("hartmann6 optimum magnitude at the published argmax", "[tasks]") {
  Eigen::VectorXd x(6);
  x << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573;
  const double value = benchmark_value(BenchmarkName::hartmann6, x);
  REQUIRE(value == Approx(3.32236801141551).margin(1e-5));

  // Local refinement around the argmax does not find anything better than
  // the published optimum.
  double best = value;
  for (int c = 0; c < 6; ++c) {
    for (const double delta : {-1e-3, 1e-3}) {
      Eigen::VectorXd probe = x;
      probe(c) += delta;
      best = std::max(best, benchmark_value(BenchmarkName::hartmann6, probe));
    }
  }
  REQUIRE(best <= benchmark_optimum(BenchmarkName::hartmann6) + 1e-6);
}

TEST_CASE("levy vanishes at the all-ones native point", "[tasks]") {
  // Native all-ones maps to 0.55 on every unit-cube coordinate.
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 0.55);
  REQUIRE(benchmark_value(BenchmarkName::levy, x) == Approx(0.0).margin(1e-12));
  REQUIRE(benchmark_optimum(BenchmarkName::levy) == 0.0);
}

TEST_CASE("benchmark name parsing round-trips", "[tasks]") {
  for (const auto name : {BenchmarkName::branin, BenchmarkName::hartmann3,
                          BenchmarkName::hartmann6, BenchmarkName::levy}) {
    REQUIRE(benchmark_from_string(to_string(name)) == name);
  }
  REQUIRE_THROWS_AS(benchmark_from_string("rosenbrock"), ConfigError);
}
