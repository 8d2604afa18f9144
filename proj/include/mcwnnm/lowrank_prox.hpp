#pragma once

#include <Eigen/Dense>

namespace mcwnnm {

/// Economy SVD: A = U * diag(S) * V^T with r = min(rows, cols).
/// S is non-increasing. Each column of U has its largest-magnitude entry
/// made non-negative (V flipped to match) so results are reproducible.
struct SvdFactors {
  Eigen::MatrixXd U;
  Eigen::VectorXd S;
  Eigen::MatrixXd V;

  Eigen::MatrixXd reconstruct() const;
  Eigen::MatrixXd reconstruct(const Eigen::VectorXd& values) const;
};

SvdFactors svd(const Eigen::MatrixXd& A);

/// max(S_i - halfweights_i, 0) elementwise.
Eigen::VectorXd soft_threshold_weighted(const Eigen::VectorXd& S,
                                        const Eigen::VectorXd& halfweights);

/// Weights on singular values, w_i = C / (sigma_i + eps).
struct SingularWeights {
  Eigen::VectorXd w;
  double C = 0.0;
  double eps = 0.0;

  static SingularWeights from_singular_values(const Eigen::VectorXd& S, double C, double eps);
};

/// argmin_X ||Y - X||_F^2 + sum_i w_i sigma_i(X) for non-descending w:
/// U * soft_threshold_weighted(S, w/2) * V^T.
Eigen::MatrixXd wnnm_closed_form(const Eigen::MatrixXd& Y, const SingularWeights& weights);
Eigen::MatrixXd wnnm_closed_form(const SvdFactors& factors, const SingularWeights& weights);

/// Closed-form shrinkage of singular values under the self-referential
/// weights w_i = C / (sigma_hat_i + eps) at penalty rho:
///   c1 = s - eps, c2 = c1^2 - 8C/rho,
///   s_hat = 0 if c2 < 0, else (c1 + sqrt(c2)) / 2.
Eigen::VectorXd reweighted_sv_solve(const Eigen::VectorXd& S, double rho, double C, double eps);

/// Proximal step argmin_Z (rho/2)||Z - Q||_F^2 + ||Z||_{w,*}: SVD of Q,
/// reweighted_sv_solve on the spectrum, reconstruction.
Eigen::MatrixXd wnn_prox(const Eigen::MatrixXd& Q, double rho, double C, double eps);

}  // namespace mcwnnm
