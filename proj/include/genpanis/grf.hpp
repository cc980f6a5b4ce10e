#pragma once

#include <Eigen/Dense>

#include "genpanis/grid.hpp"

namespace genpanis {

/// Gaussian random field sampler on the pixel-center grid with squared
/// exponential covariance k(s,s') = exp(-|s-s'|^2 / l^2). Uses a dense
/// covariance factorization with additive jitter; intended for n_pix <= 64
/// (spectral sampling would be the route for 128, not needed at this scale).
class GrfSampler {
 public:
  GrfSampler(GridSpec grid, double corr_length);

  /// Zero-mean field at pixel centers; deterministic under fixed seed.
  Eigen::VectorXd sample(std::uint64_t seed) const;

  double jitter_used() const { return jitter_; }
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  double corr_length_;
  double jitter_ = 0.0;
  Eigen::MatrixXd chol_;  // lower-triangular factor of K + jitter*I
};

/// Covariance value of the squared-exponential kernel at distance d.
inline double grf_kernel(double dist, double corr_length) {
  return std::exp(-(dist * dist) / (corr_length * corr_length));
}

/// One-shot convenience: sample then threshold.
Eigen::VectorXd sample_grf(const GrfSpec& spec, const GridSpec& grid);
Microstructure threshold_field(const Eigen::VectorXd& field, double tau, const GridSpec& grid);

}  // namespace genpanis
