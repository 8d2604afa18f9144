#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace mcwnnm {

/// Diagonal data-term weight blockdiag(w_r I, w_g I, w_b I), each block p*p
/// rows, with w_c the reciprocal noise level of channel c. Stored as three
/// scalars; never materialized.
struct ChannelWeightMatrix {
  std::array<double, 3> inv_sigma{1.0, 1.0, 1.0};
  int p = 1;

  int rows() const { return 3 * p * p; }
  double row_weight(int row) const { return inv_sigma[row / (p * p)]; }

  /// Same matrix with every weight multiplied by `factor`.
  ChannelWeightMatrix scaled(double factor) const;

  static ChannelWeightMatrix uniform(double inv_sigma, int p);
};

struct AdmmConfig {
  double mu = 1.001;
  double rho0 = 3.0;
  int max_iter = 10;
  /// Unset means 1e-8 * sqrt(rows * cols) of the group being solved.
  std::optional<double> tol;
  /// Weighted-nuclear-norm constant; unset means sqrt(2 * group size).
  std::optional<double> C;
  double eps = 1e-6;
  /// Evaluate the X-update in its (W^T W + rho/2 I)^-1 (...) arrangement
  /// instead of (2 W^T W + rho I)^-1 (...). Same minimizer.
  bool halved_x_update = false;

  void validate() const;
  double tolerance_for(Eigen::Index rows, Eigen::Index cols) const;
  double C_for(Eigen::Index group_size) const;
};

struct AdmmResiduals {
  double primal = 0.0;  // ||X_{k+1} - Z_{k+1}||_F
  double dx = 0.0;      // ||X_{k+1} - X_k||_F
  double dz = 0.0;      // ||Z_{k+1} - Z_k||_F
};

/// argmin_X ||W(Y - X)||_F^2 + (rho/2)||X - Z + A/rho||_F^2, row by row.
Eigen::MatrixXd x_update(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Z,
                         const Eigen::MatrixXd& A, double rho, const ChannelWeightMatrix& W,
                         bool halved_x_update = false);

/// wnn_prox(X + A/rho, rho, C, eps).
Eigen::MatrixXd z_update(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A, double rho,
                         double C, double eps);

/// A + rho (X - Z).
Eigen::MatrixXd multiplier_update(const Eigen::MatrixXd& A, double rho, const Eigen::MatrixXd& X,
                                  const Eigen::MatrixXd& Z);

/// Iterate-by-iterate ADMM for min ||W(Y-X)||_F^2 + ||Z||_{w,*} s.t. X = Z.
class AdmmState {
 public:
  AdmmState(Eigen::MatrixXd Y, ChannelWeightMatrix W, AdmmConfig cfg);

  /// One X/Z/A/rho sweep. Throws "divergence" on non-finite iterates.
  void step();
  bool converged() const;
  bool done() const { return k_ >= cfg_.max_iter || converged(); }

  int iteration() const { return k_; }
  double rho() const { return rho_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::MatrixXd& Z() const { return Z_; }
  const Eigen::MatrixXd& A() const { return A_; }
  const std::vector<AdmmResiduals>& residuals() const { return residuals_; }
  const std::vector<double>& rho_history() const { return rho_history_; }

 private:
  Eigen::MatrixXd Y_;
  ChannelWeightMatrix W_;
  AdmmConfig cfg_;
  double C_;
  double tol_;
  Eigen::MatrixXd X_, Z_, A_;
  double rho_;
  int k_ = 0;
  std::vector<AdmmResiduals> residuals_;
  std::vector<double> rho_history_;
};

struct AdmmResult {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  std::vector<AdmmResiduals> residuals;
  std::vector<double> rho;  // rho used at each iteration
  bool converged = false;
};

AdmmResult admm_solve(const Eigen::MatrixXd& Y, const ChannelWeightMatrix& W,
                      const AdmmConfig& cfg);

}  // namespace mcwnnm
