#pragma once

#include <optional>

#include "genpanis/coarse.hpp"
#include "genpanis/grf.hpp"
#include "genpanis/model.hpp"
#include "genpanis/residuals.hpp"

namespace genpanis {

/// Immutable physics machinery shared (read-only) by training and inference:
/// trial basis, coarse model, weight set, PDE definition, phase coefficients.
struct PhysicsContext {
  TrialBasis basis;
  CoarseModel coarse;
  WeightSet weights;
  PdeProblem problem;
  PhasePair phases;
  double lambda;  // residual precision

  PhysicsContext(const ModelConfig& cfg, PdeProblem problem_, PhasePair phases_, double lambda_)
      : basis(TrialBasis::regular(cfg.rbf_m)),
        coarse(cfg.coarse_div, basis),
        weights(cfg.weight_grid, cfg.quad_grid, basis, GridSpec(cfg.n_pix)),
        problem(std::move(problem_)),
        phases(phases_),
        lambda(lambda_) {}
};

enum class DataKind { Unlabeled, Virtual, Labeled };

/// Single-sample reparameterized estimate of one ELBO summand:
///   log p(x|z) + log p(z) - log q(z|x)             (unlabeled, Eq. over D_u)
///   + log p(r = 0 | y(z), x)                        (virtual)
///   + log N(u_obs | B y(z), diag sigma_y^2)         (labeled)
/// with z = g(x) + sigma_e * eps. Pure given (model, physics); thread-safe
/// with one gradient accumulator per thread.
class ElboEvaluator {
 public:
  ElboEvaluator(const GenModel& model, const PhysicsContext& phys,
                const Eigen::MatrixXd* obs_basis)
      : model_(model), phys_(phys), obs_basis_(obs_basis) {}

  /// Integrand value; accumulates weight * d(value)/d(params) into *grads
  /// when non-null (weight carries the mini-batch dataset scaling).
  double eval(DataKind kind, const Microstructure& x, const Eigen::VectorXd* u_obs,
              const Eigen::VectorXd& eps, GenModel* grads, double weight = 1.0) const;

 private:
  const GenModel& model_;
  const PhysicsContext& phys_;
  const Eigen::MatrixXd* obs_basis_;  // d_obs x d_y (labeled term only)
};

}  // namespace genpanis
