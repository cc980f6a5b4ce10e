#pragma once

#include <Eigen/Dense>

#include "genpanis/grid.hpp"
#include "genpanis/pde.hpp"
#include "genpanis/rbf.hpp"

namespace genpanis {

/// Boundary taper tau(s) = s1 (1-s1) s2 (1-s2); exactly zero on the boundary.
inline double tau(double s1, double s2) { return s1 * (1.0 - s1) * s2 * (1.0 - s2); }
inline Eigen::Vector2d tau_grad(double s1, double s2) {
  return {(1.0 - 2.0 * s1) * s2 * (1.0 - s2), s1 * (1.0 - s1) * (1.0 - 2.0 * s2)};
}

/// Gaussian pseudo-likelihood of zero residuals with precision lambda.
double virtual_loglik(const Eigen::VectorXd& r, double lambda);

/// Weight functions w_j = tau * eta_j on a k x k grid plus precomputed
/// quadrature tables for the weighted weak-form residuals
///
///   Darcy:     r_k = int c grad(R(y)) . grad(w_k) - int f w_k
///   Helmholtz: r_k = int [ -grad(R(y)) . grad(w_k) + w^2 c R(y) w_k ]
///
/// evaluated with the trapezoidal rule on a q x q grid; the coefficient c is
/// piecewise constant per pixel (edge points take the lower-index pixel).
class WeightSet {
 public:
  WeightSet(int weight_grid, int quad_grid, const TrialBasis& trial, GridSpec grid);

  int n_weights() const { return static_cast<int>(w_vals_.cols()); }
  int n_quad() const { return static_cast<int>(quad_w_.size()); }
  const GridSpec& grid() const { return grid_; }

  Eigen::VectorXd c_at_quad(const Eigen::VectorXd& c_pix) const;
  Eigen::VectorXd residual(const Eigen::VectorXd& c_pix, const Eigen::VectorXd& y,
                           const PdeProblem& problem) const;
  /// Cotangent on r mapped back to a cotangent on y (c is data, not a path).
  Eigen::VectorXd residual_vjp_y(const Eigen::VectorXd& c_pix, const Eigen::VectorXd& rbar,
                                 const PdeProblem& problem) const;

  /// int w_k ds, by the same quadrature.
  Eigen::VectorXd weight_integrals() const { return w_vals_.transpose() * quad_w_; }
  const Eigen::MatrixX2d& quad_points() const { return quad_pts_; }
  const Eigen::MatrixXd& weight_values() const { return w_vals_; }

 private:
  GridSpec grid_;
  Eigen::MatrixX2d quad_pts_;  // Q x 2
  Eigen::VectorXd quad_w_;     // trapezoid weights
  Eigen::VectorXi quad_pix_;   // pixel index per quadrature point
  Eigen::MatrixXd eta_vals_, eta_gx_, eta_gy_;  // Q x d_y
  Eigen::MatrixXd w_vals_, w_gx_, w_gy_;        // Q x K
};

}  // namespace genpanis
