#pragma once

#include <Eigen/Dense>

namespace momopt {

/// The norm induced by a positive definite matrix H:
///   ||z||   = <Hz, z>^{1/2}
///   ||y||_* = <H^{-1}y, y>^{1/2}   (dual norm)
///
/// H is typically the Hessian of the population objective at the optimum.
/// Construction factors H once (Cholesky); evaluation is two triangular
/// products. Requires lambda_min(H) > 0.
class HNorm {
 public:
  static HNorm identity(int dimension);

  /// Throws std::invalid_argument if H is not symmetric positive definite.
  static HNorm from_matrix(const Eigen::MatrixXd& H);

  int dimension() const { return static_cast<int>(H_.rows()); }
  const Eigen::MatrixXd& matrix() const { return H_; }
  const Eigen::MatrixXd& cholesky_factor() const { return L_; }

  double norm(const Eigen::VectorXd& z) const;
  double dual_norm(const Eigen::VectorXd& y) const;
  double distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return norm(x - y);
  }

  /// H^{-1/2} B H^{-1/2} computed through the Cholesky factor
  /// (L^{-1} B L^{-T} with H = L L^T); same spectrum, numerically stable.
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& B) const;

 private:
  HNorm() = default;
  Eigen::MatrixXd H_;
  Eigen::MatrixXd L_;  // lower-triangular, H = L L^T
};

}  // namespace momopt
