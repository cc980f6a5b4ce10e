#pragma once

#include "genpanis/elbo.hpp"
#include "genpanis/hmc.hpp"
#include "genpanis/obs.hpp"

namespace genpanis {

struct InverseResult {
  std::vector<Microstructure> x_samples;  // strictly binary draws
  Eigen::VectorXd x_mean;                 // per-pixel mean of the draws
  Eigen::VectorXd x_var;                  // per-pixel population variance
  Eigen::MatrixXd z_samples;
  double acceptance = 0.0;
};

struct ForwardResult {
  Eigen::VectorXd mean, stddev;  // at the requested locations
  Eigen::MatrixXd samples;       // L x d_obs
};

/// Posterior prediction with a trained model: HMC over z for inverse problems,
/// encoder (or HMC) sampling for forward prediction.
class Predictor {
 public:
  Predictor(GenModel model, const PhysicsContext& phys)
      : model_(std::move(model)), phys_(phys) {}

  const GenModel& model() const { return model_; }

  /// log p(z | u_hat) up to a constant (Gaussian misfit + learned prior) and
  /// its gradient; no fine-scale solve anywhere in the path.
  std::pair<double, Eigen::VectorXd> inverse_logpost(const Eigen::VectorXd& z,
                                                     const Eigen::VectorXd& u_hat,
                                                     const Eigen::MatrixXd& obs_matrix,
                                                     double sigma_n,
                                                     const PdeProblem& problem) const;

  InverseResult solve_inverse(const Eigen::VectorXd& u_hat, const Eigen::MatrixX2d& obs_locations,
                              double sigma_n, const PdeProblem& problem,
                              const HmcConfig& hmc, int workers = 1) const;

  /// Push z-samples from q(z|x_hat) (default) or from HMC on p(z|x_hat)
  /// through the deterministic physics decoder.
  ForwardResult solve_forward(const Microstructure& x_hat, const PdeProblem& problem,
                              const Eigen::MatrixX2d& locations, int n_samples, std::uint64_t seed,
                              bool use_hmc = false, const HmcConfig* hmc = nullptr) const;

  /// Deterministic PDE-output prediction for a single latent point.
  Eigen::VectorXd predict_u(const Eigen::VectorXd& z, const PdeProblem& problem,
                            const Eigen::MatrixXd& obs_matrix) const;

 private:
  GenModel model_;
  const PhysicsContext& phys_;
};

/// |ref - pred|_2 / |ref|_2.
double relative_l2(const Eigen::VectorXd& u_ref, const Eigen::VectorXd& u_pred);

/// Fraction of pixels where thresholding the posterior mean at 0.5 (strict)
/// matches the truth. The only thresholding in the pipeline lives here.
double pixel_accuracy(const Eigen::VectorXd& x_mean, const Microstructure& truth);

}  // namespace genpanis
