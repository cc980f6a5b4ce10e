#pragma once

#include "genpanis/fem.hpp"
#include "genpanis/grid.hpp"

namespace genpanis {

/// Annealed Gibbs reference sampler over the classical pixel posterior
///   p(x | u_hat) ~ N(u_hat | H(solve(c(x))), sigma_n^2 I) * prod_j Bern(x_j; p1)
/// with a full fine-scale solve per pixel flip. Desk-scale grids only.
struct GibbsConfig {
  int stages = 20;  // geometric temperature ladder t_start -> t_end
  double t_start = 10.0, t_end = 1.0;
  int sweeps_per_stage = 2;
  int sample_sweeps = 100;  // sweeps at final temperature, one sample per sweep
  double prior_p1 = 0.5;    // iid Bernoulli prior weight of phase 1
  std::uint64_t seed = 0;
};

struct GibbsResult {
  std::vector<Microstructure> samples;
  Eigen::VectorXd x_mean;
  long n_solves = 0;
};

GibbsResult gibbs_oracle(const Eigen::VectorXd& u_hat, const Eigen::MatrixX2d& obs_locations,
                         double sigma_n, const PdeProblem& problem, const GridSpec& grid,
                         const PhasePair& phases, const GibbsConfig& cfg);

/// Exact posterior pixel marginals by enumerating all 2^d_x states (d_x <= 16).
Eigen::VectorXd enumerate_posterior_marginals(const Eigen::VectorXd& u_hat,
                                              const Eigen::MatrixX2d& obs_locations, double sigma_n,
                                              const PdeProblem& problem, const GridSpec& grid,
                                              const PhasePair& phases, double prior_p1);

/// Log-likelihood of observations for one microstructure (shared by the
/// sampler, the enumerator, and tests).
double gibbs_loglik(const Eigen::VectorXd& u_hat, const Eigen::MatrixX2d& obs_locations,
                    double sigma_n, const FineSolver& solver, const GridSpec& grid,
                    const PhasePair& phases, const Microstructure& x);

}  // namespace genpanis
