#include "genpanis/residuals.hpp"

#include <cmath>

namespace genpanis {

double virtual_loglik(const Eigen::VectorXd& r, double lambda) {
  if (lambda <= 0) throw error("virtual_loglik: lambda must be positive");
  const double k = static_cast<double>(r.size());
  return 0.5 * k * std::log(lambda / (2.0 * M_PI)) - 0.5 * lambda * r.squaredNorm();
}

WeightSet::WeightSet(int weight_grid, int quad_grid, const TrialBasis& trial, GridSpec grid)
    : grid_(grid) {
  if (weight_grid < 2 || quad_grid < 2) throw error("WeightSet: grids must be >= 2");
  const int q = quad_grid;
  const int nq = q * q;
  const double h = 1.0 / (q - 1);

  quad_pts_.resize(nq, 2);
  quad_w_.resize(nq);
  quad_pix_.resize(nq);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < q; ++i) {
      const int idx = j * q + i;
      const double x = static_cast<double>(i) / (q - 1);
      const double y = static_cast<double>(j) / (q - 1);
      quad_pts_(idx, 0) = x;
      quad_pts_(idx, 1) = y;
      const double wx = (i == 0 || i == q - 1) ? 0.5 : 1.0;
      const double wy = (j == 0 || j == q - 1) ? 0.5 : 1.0;
      quad_w_[idx] = wx * wy * h * h;
      quad_pix_[idx] = grid_.pixel_index(x, y);
    }

  // Trial-basis tables.
  const int d_y = trial.size();
  eta_vals_.resize(nq, d_y);
  eta_gx_.resize(nq, d_y);
  eta_gy_.resize(nq, d_y);
  Eigen::VectorXd vals, gx, gy;
  for (int p = 0; p < nq; ++p) {
    trial.eval_with_grad(quad_pts_(p, 0), quad_pts_(p, 1), vals, gx, gy);
    eta_vals_.row(p) = vals;
    eta_gx_.row(p) = gx;
    eta_gy_.row(p) = gy;
  }

  // Weight-function tables: w_j = tau * eta_j on the weight grid.
  const TrialBasis wbasis = TrialBasis::regular(weight_grid);
  const int kw = wbasis.size();
  w_vals_.resize(nq, kw);
  w_gx_.resize(nq, kw);
  w_gy_.resize(nq, kw);
  for (int p = 0; p < nq; ++p) {
    const double x = quad_pts_(p, 0), y = quad_pts_(p, 1);
    const double tv = tau(x, y);
    const Eigen::Vector2d tg = tau_grad(x, y);
    wbasis.eval_with_grad(x, y, vals, gx, gy);
    w_vals_.row(p) = tv * vals;
    w_gx_.row(p) = tg.x() * vals + tv * gx;
    w_gy_.row(p) = tg.y() * vals + tv * gy;
  }
}

Eigen::VectorXd WeightSet::c_at_quad(const Eigen::VectorXd& c_pix) const {
  if (c_pix.size() != grid_.cells()) throw error("WeightSet: coefficient field size mismatch");
  Eigen::VectorXd c(quad_pix_.size());
  for (int p = 0; p < quad_pix_.size(); ++p) c[p] = c_pix[quad_pix_[p]];
  return c;
}

Eigen::VectorXd WeightSet::residual(const Eigen::VectorXd& c_pix, const Eigen::VectorXd& y,
                                    const PdeProblem& problem) const {
  const Eigen::VectorXd c = c_at_quad(c_pix);
  const Eigen::VectorXd gx = eta_gx_ * y;
  const Eigen::VectorXd gy = eta_gy_ * y;
  if (problem.kind == PdeKind::Darcy) {
    const Eigen::ArrayXd wq = quad_w_.array() * c.array();
    return w_gx_.transpose() * (wq * gx.array()).matrix() +
           w_gy_.transpose() * (wq * gy.array()).matrix() -
           problem.source * (w_vals_.transpose() * quad_w_);
  }
  const double w2 = problem.omega * problem.omega;
  const Eigen::VectorXd u = eta_vals_ * y;
  return -(w_gx_.transpose() * quad_w_.cwiseProduct(gx) +
           w_gy_.transpose() * quad_w_.cwiseProduct(gy)) +
         w2 * (w_vals_.transpose() * (quad_w_.array() * c.array() * u.array()).matrix());
}

Eigen::VectorXd WeightSet::residual_vjp_y(const Eigen::VectorXd& c_pix,
                                          const Eigen::VectorXd& rbar,
                                          const PdeProblem& problem) const {
  const Eigen::VectorXd c = c_at_quad(c_pix);
  if (problem.kind == PdeKind::Darcy) {
    const Eigen::ArrayXd wq = quad_w_.array() * c.array();
    const Eigen::VectorXd vx = (wq * (w_gx_ * rbar).array()).matrix();
    const Eigen::VectorXd vy = (wq * (w_gy_ * rbar).array()).matrix();
    return eta_gx_.transpose() * vx + eta_gy_.transpose() * vy;
  }
  const double w2 = problem.omega * problem.omega;
  const Eigen::VectorXd vx = quad_w_.cwiseProduct(w_gx_ * rbar);
  const Eigen::VectorXd vy = quad_w_.cwiseProduct(w_gy_ * rbar);
  const Eigen::VectorXd vm = (quad_w_.array() * c.array() * (w_vals_ * rbar).array()).matrix();
  return -(eta_gx_.transpose() * vx + eta_gy_.transpose() * vy) + w2 * (eta_vals_.transpose() * vm);
}

}  // namespace genpanis
