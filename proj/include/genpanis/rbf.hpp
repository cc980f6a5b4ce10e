#pragma once

#include <Eigen/Dense>

#include "genpanis/common.hpp"

namespace genpanis {

/// Gaussian radial trial basis eta_i(s) = exp(-|s - s_i|^2 / dl^2) with
/// centers on an m x m inclusive grid over [0,1]^2 and width dl = 1/(m-1).
class TrialBasis {
 public:
  static TrialBasis regular(int m);

  int size() const { return static_cast<int>(centers_.rows()); }  // d_y
  int m() const { return m_; }
  double width() const { return width_; }
  const Eigen::MatrixX2d& centers() const { return centers_; }

  /// eta_i(s) for all i.
  Eigen::VectorXd eval(double x, double y) const;
  /// eta values plus spatial gradients (gx, gy columns).
  void eval_with_grad(double x, double y, Eigen::VectorXd& vals, Eigen::VectorXd& gx,
                      Eigen::VectorXd& gy) const;
  /// Rows = evaluation points, columns = basis functions.
  Eigen::MatrixXd eval_matrix(const Eigen::MatrixX2d& points) const;

  /// u(s) = sum_i y_i eta_i(s) at each location.
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& y, const Eigen::MatrixX2d& locations) const;

 private:
  int m_ = 0;
  double width_ = 0.0;
  Eigen::MatrixX2d centers_;
};

}  // namespace genpanis
