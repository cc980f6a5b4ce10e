#pragma once

#include <vector>

#include "genpanis/nn.hpp"

namespace genpanis {

/// Learnable latent prior built from affine coupling layers. Each layer keeps
/// a fixed binary half-mask; the unmasked components are scaled/translated by
/// networks of the masked ones, so inversion is exact by construction. With
/// zero layers the prior degenerates to a standard normal.
class Flow {
 public:
  struct Coupling {
    nn::Mlp s_net, t_net;
    Eigen::VectorXd alpha;  // learned per-dimension scale on tanh(s_net(.))
    Eigen::VectorXd mask;   // entries exactly 0 or 1, fixed
  };

  Flow() = default;
  Flow(int d_z, int n_layers, int hidden);
  /// Near-identity start: alpha = 0.01, translation output layer zeroed.
  void init(Rng& rng);

  int dim() const { return d_z_; }
  int n_layers() const { return static_cast<int>(layers_.size()); }
  std::vector<Coupling>& layers() { return layers_; }
  const std::vector<Coupling>& layers() const { return layers_; }

  struct StepTrace {
    Eigen::VectorXd input;  // layer input (direction-dependent)
    Eigen::VectorXd masked;
    Eigen::VectorXd s_raw, s, t;
    nn::Mlp::Trace s_tr, t_tr;
  };
  struct Trace {
    std::vector<StepTrace> steps;  // in execution order
    Eigen::VectorXd zeta;          // base-space point (filled by inverse())
  };

  /// zeta -> z with log|det dz/dzeta| = sum_k sum_i (1-m_ki) s_ki.
  std::pair<Eigen::VectorXd, double> forward(const Eigen::VectorXd& zeta,
                                             Trace* tr = nullptr) const;
  /// z -> zeta with the negated log-determinant.
  std::pair<Eigen::VectorXd, double> inverse(const Eigen::VectorXd& z, Trace* tr = nullptr) const;

  /// Backprop through the inverse pass: cotangents on (zeta, logdet) produce
  /// parameter gradients in `g` and the cotangent on z.
  Eigen::VectorXd inverse_backward(const Trace& tr, const Eigen::VectorXd& dzeta, double dlogdet,
                                   Flow& g) const;
  /// Backprop through the forward pass.
  Eigen::VectorXd forward_backward(const Trace& tr, const Eigen::VectorXd& dz, double dlogdet,
                                   Flow& g) const;

  /// log p(z) by change of variables through the inverse map.
  double prior_logpdf(const Eigen::VectorXd& z, Trace* tr = nullptr) const;
  /// Gradient of dvalue * log p(z) w.r.t. z (and parameters into `g`).
  Eigen::VectorXd prior_logpdf_backward(const Trace& tr, double dvalue, Flow& g) const;

  /// Draw z ~ p(z) by pushing a standard normal through the flow.
  Eigen::VectorXd sample(Rng& rng) const;

 private:
  void assert_finite(const Eigen::VectorXd& v, const char* where) const;

  int d_z_ = 0;
  std::vector<Coupling> layers_;
};

}  // namespace genpanis
