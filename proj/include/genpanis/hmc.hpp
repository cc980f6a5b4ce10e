#pragma once

#include <functional>

#include <Eigen/Dense>

#include "genpanis/common.hpp"

namespace genpanis {

/// Differentiable log-density: value and gradient at a point.
using LogDensity = std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;

struct HmcConfig {
  double step_size = 0.05;
  int leapfrog = 20;
  int n_samples = 1000;  // kept samples (total across chains)
  int burnin = 500;      // per chain
  int chains = 4;
  bool adapt = true;  // tune step size during burn-in toward [lo, hi]
  double target_lo = 0.6, target_hi = 0.9;
  std::uint64_t seed = 0;

  void validate() const {
    if (step_size <= 0 || leapfrog < 0 || n_samples < 1 || burnin < 0 || chains < 1)
      throw error("HmcConfig: invalid settings");
  }
};

struct HmcChainResult {
  Eigen::MatrixXd samples;  // n x d, post burn-in
  double acceptance = 0.0;  // post burn-in
  double step_size = 0.0;   // after adaptation
};

/// One Metropolis-corrected leapfrog chain with identity mass matrix.
/// Throws if the post-burn-in acceptance collapses below 1%.
HmcChainResult hmc_chain(const LogDensity& target, const Eigen::VectorXd& init, int n_keep,
                         const HmcConfig& cfg, Rng& rng);

/// |H(end) - H(start)| of a single leapfrog trajectory (for step-size scans).
double leapfrog_energy_error(const LogDensity& target, const Eigen::VectorXd& q0,
                             const Eigen::VectorXd& p0, double step_size, int n_steps);

}  // namespace genpanis
