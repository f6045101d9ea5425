#include <catch2/catch.hpp>

#include <Eigen/Dense>

#include "qacq/linalg.hpp"
#include "qacq/reparam.hpp"

using namespace qacq;

TEST_CASE("reparameterize with zero variates returns the mean", "[reparam]") {
  const Eigen::VectorXd mu = Eigen::VectorXd::LinSpaced(3, -1.0, 1.0);
  Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(3, 3);
  BaseSamples z;
  z.z = Eigen::MatrixXd::Zero(4, 3);
  const auto paths = reparameterize(mu, chol, z);
  for (int k = 0; k < 4; ++k) {
    REQUIRE((paths.y.row(k).transpose() - mu).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("identity reparameterization is the identity", "[reparam]") {
  const auto z = draw_base_samples(8, 2, BaseMode::deterministic, 3);
  const auto paths = reparameterize(Eigen::VectorXd::Zero(2),
                                    Eigen::MatrixXd::Identity(2, 2), z);
  REQUIRE((paths.y - z.z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reparameterize rejects shape mismatches", "[reparam]") {
  const auto z = draw_base_samples(8, 3, BaseMode::deterministic, 3);
  REQUIRE_THROWS_AS(reparameterize(Eigen::VectorXd::Zero(2),
                                   Eigen::MatrixXd::Identity(2, 2), z),
                    InputError);
}

TEST_CASE("empirical covariance of paths converges to the target", "[reparam]") {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.6, 0.6, 0.9;
  const auto fac = stable_cholesky(cov);
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(2, 0.4);
  const auto z = draw_base_samples(1 << 16, 2, BaseMode::deterministic, 19);
  const auto paths = reparameterize(mu, fac.chol, z);

  const Eigen::RowVectorXd mean = paths.y.colwise().mean();
  const Eigen::MatrixXd centered = paths.y.rowwise() - mean;
  const Eigen::MatrixXd emp =
      centered.transpose() * centered / static_cast<double>(paths.y.rows());
  REQUIRE((emp - cov).norm() < 0.05 * cov.norm());

  // Mean recovery within 3 standard errors per coordinate.
  const double m = static_cast<double>(paths.y.rows());
  for (int j = 0; j < 2; ++j) {
    const double se = std::sqrt(cov(j, j) / m);
    REQUIRE(std::abs(mean(j) - mu(j)) < 3.0 * se);
  }
}
