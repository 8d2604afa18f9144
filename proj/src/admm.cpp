#include "mcwnnm/admm.hpp"

#include <cmath>
#include <stdexcept>

#include "mcwnnm/lowrank_prox.hpp"

namespace mcwnnm {

ChannelWeightMatrix ChannelWeightMatrix::scaled(double factor) const {
  ChannelWeightMatrix out = *this;
  for (double& w : out.inv_sigma) w *= factor;
  return out;
}

ChannelWeightMatrix ChannelWeightMatrix::uniform(double inv_sigma, int p) {
  return {{inv_sigma, inv_sigma, inv_sigma}, p};
}

void AdmmConfig::validate() const {
  if (!(mu > 1.0)) throw std::invalid_argument("admm: mu must exceed 1");
  if (!(rho0 > 0.0)) throw std::invalid_argument("admm: rho0 must be positive");
  if (max_iter < 1) throw std::invalid_argument("admm: K1 must be at least 1");
  if (tol && !(*tol > 0.0)) throw std::invalid_argument("admm: tol must be positive");
  if (C && !(*C > 0.0)) throw std::invalid_argument("admm: C must be positive");
  if (eps < 0.0) throw std::invalid_argument("admm: eps must be non-negative");
}

double AdmmConfig::tolerance_for(Eigen::Index rows, Eigen::Index cols) const {
  return tol ? *tol : 1e-8 * std::sqrt(static_cast<double>(rows * cols));
}

double AdmmConfig::C_for(Eigen::Index group_size) const {
  return C ? *C : std::sqrt(2.0 * static_cast<double>(group_size));
}

Eigen::MatrixXd x_update(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Z,
                         const Eigen::MatrixXd& A, double rho, const ChannelWeightMatrix& W,
                         bool halved_x_update) {
  if (Y.rows() != W.rows() || Z.rows() != Y.rows() || A.rows() != Y.rows() ||
      Z.cols() != Y.cols() || A.cols() != Y.cols()) {
    throw std::invalid_argument("x_update: shape mismatch");
  }
  if (!(rho > 0.0)) throw std::invalid_argument("x_update: rho must be positive");
  const int block = W.p * W.p;
  Eigen::MatrixXd X(Y.rows(), Y.cols());
  for (int c = 0; c < 3; ++c) {
    const double w2 = W.inv_sigma[c] * W.inv_sigma[c];
    auto rows = Eigen::seqN(c * block, block);
    if (halved_x_update) {
      X(rows, Eigen::all) = (w2 * Y(rows, Eigen::all) + 0.5 * rho * Z(rows, Eigen::all) -
                             0.5 * A(rows, Eigen::all)) /
                            (w2 + 0.5 * rho);
    } else {
      X(rows, Eigen::all) =
          (2.0 * w2 * Y(rows, Eigen::all) + rho * Z(rows, Eigen::all) - A(rows, Eigen::all)) /
          (2.0 * w2 + rho);
    }
  }
  return X;
}

Eigen::MatrixXd z_update(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A, double rho,
                         double C, double eps) {
  if (!(rho > 0.0)) throw std::invalid_argument("z_update: rho must be positive");
  return wnn_prox(X + A / rho, rho, C, eps);
}

Eigen::MatrixXd multiplier_update(const Eigen::MatrixXd& A, double rho, const Eigen::MatrixXd& X,
                                  const Eigen::MatrixXd& Z) {
  if (A.rows() != X.rows() || A.cols() != X.cols() || Z.rows() != X.rows() ||
      Z.cols() != X.cols()) {
    throw std::invalid_argument("multiplier_update: shape mismatch");
  }
  return A + rho * (X - Z);
}

AdmmState::AdmmState(Eigen::MatrixXd Y, ChannelWeightMatrix W, AdmmConfig cfg)
    : Y_(std::move(Y)), W_(W), cfg_(cfg) {
  cfg_.validate();
  if (!Y_.allFinite()) throw std::invalid_argument("admm: input contains non-finite values");
  if (Y_.rows() != W_.rows()) throw std::invalid_argument("admm: weight matrix size mismatch");
  for (double w : W_.inv_sigma) {
    if (!std::isfinite(w) || !(w > 0.0)) {
      throw std::invalid_argument("admm: channel weights must be finite and positive");
    }
  }
  C_ = cfg_.C_for(Y_.cols());
  tol_ = cfg_.tolerance_for(Y_.rows(), Y_.cols());
  X_ = Eigen::MatrixXd::Zero(Y_.rows(), Y_.cols());
  Z_ = X_;
  A_ = X_;
  rho_ = cfg_.rho0;
}

void AdmmState::step() {
  Eigen::MatrixXd X = x_update(Y_, Z_, A_, rho_, W_, cfg_.halved_x_update);
  Eigen::MatrixXd Z = z_update(X, A_, rho_, C_, cfg_.eps);
  A_ = multiplier_update(A_, rho_, X, Z);
  if (!X.allFinite() || !Z.allFinite() || !A_.allFinite()) {
    throw std::runtime_error("divergence");
  }
  residuals_.push_back({(X - Z).norm(), (X - X_).norm(), (Z - Z_).norm()});
  rho_history_.push_back(rho_);
  X_ = std::move(X);
  Z_ = std::move(Z);
  ++k_;
  rho_ = cfg_.rho0 * std::pow(cfg_.mu, k_);
}

bool AdmmState::converged() const {
  if (residuals_.empty()) return false;
  const auto& r = residuals_.back();
  return r.primal <= tol_ && r.dx <= tol_ && r.dz <= tol_;
}

AdmmResult admm_solve(const Eigen::MatrixXd& Y, const ChannelWeightMatrix& W,
                      const AdmmConfig& cfg) {
  AdmmState state(Y, W, cfg);
  while (!state.done()) state.step();
  return {state.X(), state.Z(), state.residuals(), state.rho_history(), state.converged()};
}

}  // namespace mcwnnm
