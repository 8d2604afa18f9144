#include "mcwnnm/lowrank_prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <lapacke.h>

namespace mcwnnm {

Eigen::MatrixXd SvdFactors::reconstruct() const { return reconstruct(S); }

Eigen::MatrixXd SvdFactors::reconstruct(const Eigen::VectorXd& values) const {
  if (values.size() != S.size()) throw std::invalid_argument("singular value count mismatch");
  return U * values.asDiagonal() * V.transpose();
}

namespace {

// Tall-or-square case (rows >= cols) through LAPACK's divide and conquer.
SvdFactors svd_tall(const Eigen::MatrixXd& A) {
  const auto m = static_cast<lapack_int>(A.rows());
  const auto n = static_cast<lapack_int>(A.cols());
  SvdFactors f;
  f.U.resize(m, n);
  f.S.resize(n);
  Eigen::MatrixXd Vt(n, n);
  Eigen::MatrixXd work = A;
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, f.S.data(),
                                   f.U.data(), m, Vt.data(), n);
  if (info != 0) {
    // dgesdd occasionally fails to converge; dgesvd is slower but sturdier.
    work = A;
    Eigen::VectorXd superb(std::max<lapack_int>(n - 1, 1));
    info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, work.data(), m, f.S.data(),
                          f.U.data(), m, Vt.data(), n, superb.data());
  }
  if (info != 0) throw std::runtime_error("svd did not converge");
  f.V = Vt.transpose();
  return f;
}

}  // namespace

SvdFactors svd(const Eigen::MatrixXd& A) {
  if (A.size() == 0) throw std::invalid_argument("svd of an empty matrix");
  if (!A.allFinite()) throw std::invalid_argument("svd input contains non-finite values");

  SvdFactors f;
  if (A.rows() >= A.cols()) {
    f = svd_tall(A);
  } else {
    SvdFactors t = svd_tall(A.transpose());
    f.U = std::move(t.V);
    f.S = std::move(t.S);
    f.V = std::move(t.U);
  }
  for (Eigen::Index j = 0; j < f.U.cols(); ++j) {
    Eigen::Index imax = 0;
    f.U.col(j).cwiseAbs().maxCoeff(&imax);
    if (f.U(imax, j) < 0.0) {
      f.U.col(j) *= -1.0;
      f.V.col(j) *= -1.0;
    }
  }
  return f;
}

Eigen::VectorXd soft_threshold_weighted(const Eigen::VectorXd& S,
                                        const Eigen::VectorXd& halfweights) {
  if (S.size() != halfweights.size()) {
    throw std::invalid_argument("soft_threshold_weighted: length mismatch");
  }
  if ((halfweights.array() < 0.0).any()) {
    throw std::invalid_argument("soft_threshold_weighted: weights must be non-negative");
  }
  return (S - halfweights).cwiseMax(0.0);
}

SingularWeights SingularWeights::from_singular_values(const Eigen::VectorXd& S, double C,
                                                      double eps) {
  return {(C / (S.array() + eps)).matrix(), C, eps};
}

Eigen::MatrixXd wnnm_closed_form(const SvdFactors& f, const SingularWeights& weights) {
  const auto& w = weights.w;
  for (Eigen::Index i = 1; i < w.size(); ++i) {
    if (w[i] < w[i - 1]) throw std::invalid_argument("weights must be non-descending");
  }
  if (w.size() != f.S.size()) throw std::invalid_argument("weight count differs from rank");
  return f.reconstruct(soft_threshold_weighted(f.S, 0.5 * w));
}

Eigen::MatrixXd wnnm_closed_form(const Eigen::MatrixXd& Y, const SingularWeights& weights) {
  return wnnm_closed_form(svd(Y), weights);
}

Eigen::VectorXd reweighted_sv_solve(const Eigen::VectorXd& S, double rho, double C, double eps) {
  if (!(rho > 0.0)) throw std::invalid_argument("reweighted_sv_solve: rho must be positive");
  if (!(C > 0.0)) throw std::invalid_argument("reweighted_sv_solve: C must be positive");
  if (eps < 0.0) throw std::invalid_argument("reweighted_sv_solve: eps must be non-negative");
  const double gap = 8.0 * C / rho;
  Eigen::VectorXd out(S.size());
  for (Eigen::Index i = 0; i < S.size(); ++i) {
    const double c1 = S[i] - eps;
    const double c2 = c1 * c1 - gap;
    out[i] = c2 < 0.0 ? 0.0 : 0.5 * (c1 + std::sqrt(c2));
  }
  // The map is monotone, so ordered input must give ordered output.
  for (Eigen::Index i = 1; i < S.size(); ++i) {
    if (S[i] <= S[i - 1] && out[i] > out[i - 1]) {
      throw std::logic_error("reweighted_sv_solve broke singular value ordering");
    }
  }
  return out;
}

Eigen::MatrixXd wnn_prox(const Eigen::MatrixXd& Q, double rho, double C, double eps) {
  const SvdFactors f = svd(Q);
  return f.reconstruct(reweighted_sv_solve(f.S, rho, C, eps));
}

}  // namespace mcwnnm
