#include <catch2/catch.hpp>

#include <Eigen/Dense>

#include "qacq/linalg.hpp"
#include "qacq/rng.hpp"

using namespace qacq;

namespace {

Eigen::MatrixXd random_spd(int q, std::uint64_t seed) {
  const CounterRng rng(seed);
  Eigen::MatrixXd a(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) a(i, j) = rng.normal(i * q + j);
  Eigen::MatrixXd s = a * a.transpose();
  s.diagonal().array() += 0.5;
  return s;
}

}  // namespace

TEST_CASE("stable_cholesky leaves the identity untouched", "[linalg]") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
  const auto res = stable_cholesky(eye);
  REQUIRE(res.jitter_used == 0.0);
  REQUIRE((res.chol - eye).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("stable_cholesky factors a small SPD matrix", "[linalg]") {
  Eigen::MatrixXd s(2, 2);
  s << 4.0, 2.0, 2.0, 3.0;
  const auto res = stable_cholesky(s);
  REQUIRE(res.jitter_used == 0.0);
  REQUIRE(res.chol(0, 0) == Approx(2.0));
  REQUIRE(res.chol(1, 0) == Approx(1.0));
  REQUIRE(res.chol(1, 1) == Approx(std::sqrt(2.0)));
  const Eigen::MatrixXd rebuilt = res.chol * res.chol.transpose();
  REQUIRE((rebuilt - s).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stable_cholesky rejects an indefinite matrix", "[linalg]") {
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 2.0, 2.0, 1.0;
  REQUIRE_THROWS_AS(stable_cholesky(s, 1e-6), NotPositiveDefiniteError);
}

TEST_CASE("stable_cholesky reconstruction within jitter", "[linalg]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int q = 1 + static_cast<int>(seed % 6);
    const Eigen::MatrixXd s = random_spd(q, seed);
    const auto res = stable_cholesky(s);
    Eigen::MatrixXd target = s;
    target.diagonal().array() += res.jitter_used;
    REQUIRE((res.chol * res.chol.transpose() - target).cwiseAbs().maxCoeff() <
            1e-8);
  }
}

TEST_CASE("stable_cholesky rescues a singular PSD matrix with jitter",
          "[linalg]") {
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 1.0, 1.0, 1.0;  // rank one
  const auto res = stable_cholesky(s);
  REQUIRE(res.jitter_used > 0.0);
  REQUIRE(res.jitter_used <= default_max_jitter(s));
}

TEST_CASE("cholesky_pullback scalar case", "[linalg]") {
  Eigen::MatrixXd chol(1, 1), lbar(1, 1);
  chol << 3.0;
  lbar << 0.7;
  const Eigen::MatrixXd sbar = cholesky_pullback(chol, lbar);
  REQUIRE(sbar(0, 0) == Approx(0.7 / (2.0 * 3.0)));
}

TEST_CASE("cholesky_pullback of zero sensitivity is zero", "[linalg]") {
  const Eigen::MatrixXd s = random_spd(3, 5);
  const auto res = stable_cholesky(s);
  const Eigen::MatrixXd sbar =
      cholesky_pullback(res.chol, Eigen::MatrixXd::Zero(3, 3));
  REQUIRE(sbar.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cholesky_pullback matches finite differences", "[linalg]") {
  const int q = 3;
  const double h = 1e-6;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd s = random_spd(q, 100 + seed);
    const CounterRng rng(derive_seed(9, seed));
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j <= i; ++j) w(i, j) = rng.normal(i * q + j);

    const auto phi = [&](const Eigen::MatrixXd& cov) {
      return (w.array() * stable_cholesky(cov, 0.0).chol.array()).sum();
    };

    const Eigen::MatrixXd sbar =
        cholesky_pullback(stable_cholesky(s, 0.0).chol, w);

    for (int i = 0; i < q; ++i) {
      for (int j = 0; j <= i; ++j) {
        Eigen::MatrixXd bump = Eigen::MatrixXd::Zero(q, q);
        bump(i, j) = h;
        bump(j, i) = h;  // doubles the diagonal bump on purpose below
        if (i == j) bump(i, j) = h;
        const double fd = (phi(s + bump) - phi(s - bump)) / (2.0 * h);
        const double analytic = (i == j) ? sbar(i, i) : 2.0 * sbar(i, j);
        REQUIRE(fd == Approx(analytic).epsilon(1e-4).margin(1e-8));
      }
    }
  }
}

TEST_CASE("chol_solve inverts against the factored matrix", "[linalg]") {
  const Eigen::MatrixXd s = random_spd(5, 77);
  const auto res = stable_cholesky(s, 0.0);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, -1.0, 2.0);
  const Eigen::VectorXd x = chol_solve(res.chol, b);
  REQUIRE((s * x - b).cwiseAbs().maxCoeff() < 1e-10);
}
