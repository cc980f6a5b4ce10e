#include "genpanis/grf.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace genpanis {

Eigen::VectorXd to_coefficients(const Microstructure& x, const PhasePair& phases) {
  const int n = static_cast<int>(x.values.size());
  Eigen::VectorXd c(n);
  for (int j = 0; j < n; ++j) c[j] = x.values[j] ? phases.c1 : phases.c0;
  return c;
}

double threshold_for_volume_fraction(double vf) {
  if (vf <= 0.0 || vf >= 1.0) throw error("volume fraction must be in (0,1)");
  // Phi^{-1}(1 - vf) by bisection on the standard normal CDF.
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  double lo = -10, hi = 10;
  const double target = 1.0 - vf;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

GrfSampler::GrfSampler(GridSpec grid, double corr_length)
    : grid_(grid), corr_length_(corr_length) {
  if (corr_length_ <= 0) throw error("GrfSampler: corr_length must be positive");
  const int n = grid_.cells();
  Eigen::MatrixXd cov(n, n);
  for (int a = 0; a < n; ++a) {
    const double ax = grid_.pixel_center_x(a), ay = grid_.pixel_center_y(a);
    for (int b = a; b < n; ++b) {
      const double dx = ax - grid_.pixel_center_x(b);
      const double dy = ay - grid_.pixel_center_y(b);
      const double v = grf_kernel(std::sqrt(dx * dx + dy * dy), corr_length_);
      cov(a, b) = v;
      cov(b, a) = v;
    }
  }
  // The squared-exponential covariance is numerically rank deficient on a
  // fine grid; escalate the jitter until the factorization succeeds.
  for (double jitter = 1e-10; jitter <= 1e-6; jitter *= 10.0) {
    Eigen::MatrixXd shifted = cov;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      jitter_ = jitter;
      return;
    }
  }
  throw error("GrfSampler: covariance factorization failed even with jitter 1e-6");
}

Eigen::VectorXd GrfSampler::sample(std::uint64_t seed) const {
  Rng rng(seed);
  const int n = grid_.cells();
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps[i] = rng.normal();
  return chol_ * eps;
}

Eigen::VectorXd sample_grf(const GrfSpec& spec, const GridSpec& grid) {
  return GrfSampler(grid, spec.corr_length).sample(spec.seed);
}

Microstructure threshold_field(const Eigen::VectorXd& field, double tau, const GridSpec& grid) {
  if (field.size() != grid.cells()) throw error("threshold_field: size mismatch");
  std::vector<std::uint8_t> values(field.size());
  for (int j = 0; j < field.size(); ++j) values[j] = field[j] > tau ? 1 : 0;
  return Microstructure(grid, std::move(values));
}

}  // namespace genpanis
