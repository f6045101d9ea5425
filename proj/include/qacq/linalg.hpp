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

#ifndef QACQ_LINALG_HPP
#define QACQ_LINALG_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "qacq/errors.hpp"

namespace qacq {

struct CholeskyResult {
  Eigen::MatrixXd chol;  // lower triangular, positive diagonal
  double jitter_used = 0.0;
};

/// Default jitter cap used when callers do not pass one: 1e-4 * tr(S)/q,
/// floored at 1e-8 so numerically-zero matrices (an interpolating
/// posterior, say) can still be rescued.
inline double default_max_jitter(const Eigen::MatrixXd& cov) {
  const double mean_diag = cov.trace() / static_cast<double>(cov.rows());
  return std::max(1e-4 * mean_diag, 1e-8);
}

/// Cholesky factorization with an escalating diagonal jitter ladder.
///
/// Attempts jitter 0 first, then 1e-10 * tr(S)/q escalating by 10x until the
/// factorization succeeds or the jitter would exceed max_jitter.  A negative
/// max_jitter selects the default cap of 1e-4 * tr(S)/q.
inline CholeskyResult stable_cholesky(const Eigen::MatrixXd& cov,
                                      double max_jitter = -1.0) {
  const auto q = cov.rows();
  if (cov.cols() != q || q < 1) {
    throw InputError("stable_cholesky: matrix must be square and non-empty");
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw InputError("stable_cholesky: matrix is not symmetric within 1e-8");
  }
  if (max_jitter < 0.0) {
    max_jitter = default_max_jitter(cov);
  }

  const double mean_diag = cov.trace() / static_cast<double>(q);
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd shifted = cov;
    if (jitter > 0.0) {
      shifted.diagonal().array() += jitter;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd lower = llt.matrixL();
      if ((lower.diagonal().array() > 0.0).all()) {
        return {std::move(lower), jitter};
      }
    }
    const double next =
        jitter == 0.0 ? std::max(1e-10 * mean_diag, 1e-14) : 10.0 * jitter;
    if (next > max_jitter) {
      throw NotPositiveDefiniteError(
          "stable_cholesky: factorization failed at max jitter");
    }
    jitter = next;
  }
}

/// Reverse-mode map through the Cholesky factorization.
///
/// Given L with L L^T = S and the sensitivity Lbar = d(scalar)/dL, returns
/// Sbar = d(scalar)/dS under the full-matrix convention
/// d(scalar) = sum_ij Sbar_ij dS_ij for symmetric perturbations dS.
/// Uses the column-by-column backward recurrence of the standard
/// (unblocked) factorization; output is symmetrized.
inline Eigen::MatrixXd cholesky_pullback(const Eigen::MatrixXd& chol,
                                         const Eigen::MatrixXd& chol_bar) {
  const auto q = chol.rows();
  if (chol.cols() != q || chol_bar.rows() != q || chol_bar.cols() != q) {
    throw InputError("cholesky_pullback: shape mismatch");
  }
  Eigen::MatrixXd lbar =
      chol_bar.triangularView<Eigen::Lower>().toDenseMatrix();
  Eigen::MatrixXd abar = Eigen::MatrixXd::Zero(q, q);

  // Reverse sweep of L_jj = sqrt(A_jj - sum_k L_jk^2) and, for i > j,
  // L_ij = (A_ij - sum_k L_ik L_jk) / L_jj.  Off-diagonal adjoints must be
  // consumed before the column's diagonal adjoint.
  for (Eigen::Index j = q - 1; j >= 0; --j) {
    const double diag = chol(j, j);
    if (!(diag > 0.0)) {
      throw NumericalError("cholesky_pullback: singular diagonal");
    }
    for (Eigen::Index i = q - 1; i > j; --i) {
      const double g = lbar(i, j) / diag;
      abar(i, j) += g;
      for (Eigen::Index k = 0; k < j; ++k) {
        lbar(i, k) -= g * chol(j, k);
        lbar(j, k) -= g * chol(i, k);
      }
      lbar(j, j) -= g * chol(i, j);
    }
    const double sbar = lbar(j, j) / (2.0 * diag);
    abar(j, j) += sbar;
    for (Eigen::Index k = 0; k < j; ++k) {
      lbar(j, k) -= 2.0 * sbar * chol(j, k);
    }
  }
  return 0.5 * (abar + abar.transpose());
}

/// Solves S x = b given the lower Cholesky factor of S.
inline Eigen::VectorXd chol_solve(const Eigen::MatrixXd& chol,
                                  const Eigen::VectorXd& b) {
  Eigen::VectorXd x = chol.triangularView<Eigen::Lower>().solve(b);
  chol.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

/// Solves S X = B column-wise given the lower Cholesky factor of S.
inline Eigen::MatrixXd chol_solve_mat(const Eigen::MatrixXd& chol,
                                      const Eigen::MatrixXd& b) {
  Eigen::MatrixXd x = chol.triangularView<Eigen::Lower>().solve(b);
  chol.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

}  // namespace qacq

#endif  // QACQ_LINALG_HPP
