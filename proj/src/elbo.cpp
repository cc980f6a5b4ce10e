#include "genpanis/elbo.hpp"

#include <cmath>

namespace genpanis {

double ElboEvaluator::eval(DataKind kind, const Microstructure& x, const Eigen::VectorXd* u_obs,
                           const Eigen::VectorXd& eps, GenModel* grads, double weight) const {
  const int d_z = model_.cfg.d_z;
  if (eps.size() != d_z) throw error("ElboEvaluator: eps dimension mismatch");

  Encoder::Trace enc_tr;
  const Eigen::VectorXd mu = model_.encoder.forward(x.values, grads ? &enc_tr : nullptr);
  const double sigma_e = model_.sigma_e();
  const Eigen::VectorXd z = mu + sigma_e * eps;

  const double log_dec = model_.decoder.loglik(x.values, z);
  Flow::Trace flow_tr;
  const double log_prior = model_.flow.prior_logpdf(z, &flow_tr);
  // log q(z|x) at z = mu + sigma_e*eps, written in (eps, sigma_e) form.
  const double log_q =
      -0.5 * d_z * std::log(2.0 * M_PI) - d_z * std::log(sigma_e) - 0.5 * eps.squaredNorm();

  double value = log_dec + log_prior - log_q;

  // The physics chain y(z) = lift(coarse_solve(prop(z))) for virtual/labeled.
  std::optional<PropNet::Trace> prop_tr;
  std::optional<CoarseModel::Solution> sol;
  Eigen::VectorXd pred;  // B y (labeled)
  Eigen::VectorXd r;     // weighted residuals (virtual)
  if (kind != DataKind::Unlabeled) {
    prop_tr.emplace();
    const Eigen::VectorXd X = model_.prop.forward(z, &*prop_tr);
    sol = phys_.coarse.solve(X, phys_.problem);
    if (kind == DataKind::Virtual) {
      const Eigen::VectorXd c = to_coefficients(x, phys_.phases);
      r = phys_.weights.residual(c, sol->y_coeff, phys_.problem);
      value += virtual_loglik(r, phys_.lambda);
    } else {
      if (!u_obs) throw error("ElboEvaluator: labeled item without observations");
      if (!obs_basis_) throw error("ElboEvaluator: labeled term requires an observation basis");
      if (u_obs->size() != obs_basis_->rows() || u_obs->size() != model_.log_sigma_y.size())
        throw error("ElboEvaluator: observation size mismatch");
      pred = (*obs_basis_) * sol->y_coeff;
      const Eigen::ArrayXd sy = model_.log_sigma_y.array().exp();
      const Eigen::ArrayXd diff = u_obs->array() - pred.array();
      value += (-0.5 * std::log(2.0 * M_PI) - model_.log_sigma_y.array() -
                0.5 * diff.square() / sy.square())
                   .sum();
    }
  }

  if (!grads) return value;

  // Backward pass. z receives cotangents from every term except log q, whose
  // (eps, sigma_e) form contributes only the +d_z entropy gradient below.
  Eigen::VectorXd zbar = model_.decoder.loglik_backward(x.values, z, weight, grads->decoder);
  zbar += model_.flow.prior_logpdf_backward(flow_tr, weight, grads->flow);

  if (kind != DataKind::Unlabeled) {
    Eigen::VectorXd ybar;
    if (kind == DataKind::Virtual) {
      const Eigen::VectorXd c = to_coefficients(x, phys_.phases);
      const Eigen::VectorXd rbar = -weight * phys_.lambda * r;
      ybar = phys_.weights.residual_vjp_y(c, rbar, phys_.problem);
    } else {
      const Eigen::ArrayXd sy2 = (2.0 * model_.log_sigma_y.array()).exp();
      const Eigen::ArrayXd diff = u_obs->array() - pred.array();
      ybar = weight * (obs_basis_->transpose() * (diff / sy2).matrix());
      grads->log_sigma_y.array() += weight * (-1.0 + diff.square() / sy2);
    }
    const Eigen::VectorXd Xbar = phys_.coarse.vjp(*sol, ybar);
    zbar += model_.prop.backward(*prop_tr, Xbar, grads->prop);
  }

  // z = mu + exp(log_sigma_e) * eps
  grads->log_sigma_e[0] += zbar.dot(eps) * sigma_e;
  grads->log_sigma_e[0] += weight * static_cast<double>(d_z);  // from -log q
  model_.encoder.backward(enc_tr, zbar, grads->encoder);
  return value;
}

}  // namespace genpanis
