#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "genpanis/common.hpp"

namespace genpanis {

/// Square pixel grid over the unit square [0,1]^2. Pixel (i,j) covers
/// [i/n, (i+1)/n] x [j/n, (j+1)/n]; fields are stored row-major with
/// index j*n + i (j = vertical, i = horizontal).
struct GridSpec {
  int n_pix = 32;

  GridSpec() = default;
  explicit GridSpec(int n) : n_pix(n) {
    if (n_pix < 4) throw error("GridSpec: n_pix must be >= 4");
  }

  int cells() const { return n_pix * n_pix; }
  double pixel_center_x(int idx) const { return (idx % n_pix + 0.5) / n_pix; }
  double pixel_center_y(int idx) const { return (idx / n_pix + 0.5) / n_pix; }

  /// Pixel containing point (x,y); points exactly on a pixel edge take the
  /// lower-index pixel.
  int pixel_index(double x, double y) const {
    return edge_low(y) * n_pix + edge_low(x);
  }

  int edge_low(double s) const {
    const double u = s * n_pix;
    double k = std::floor(u);
    if (u - k < 1e-12 && k > 0) k -= 1.0;  // on an edge: lower pixel
    int idx = static_cast<int>(k);
    if (idx < 0) idx = 0;
    if (idx >= n_pix) idx = n_pix - 1;
    return idx;
  }

  bool operator==(const GridSpec& o) const { return n_pix == o.n_pix; }
};

/// Two-phase microstructure: strictly binary at every pipeline stage.
struct Microstructure {
  GridSpec grid;
  std::vector<std::uint8_t> values;  // length n_pix^2, each exactly 0 or 1

  Microstructure() = default;
  Microstructure(GridSpec g, std::vector<std::uint8_t> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.cells())
      throw error("Microstructure: value count does not match grid");
    for (auto b : values)
      if (b > 1) throw error("Microstructure: non-binary entry");
  }

  double volume_fraction() const {
    std::size_t ones = 0;
    for (auto b : values) ones += b;
    return static_cast<double>(ones) / static_cast<double>(values.size());
  }
};

/// Coefficient values of the two phases (phase 0 -> c0, phase 1 -> c1).
struct PhasePair {
  double c0 = 1.0;
  double c1 = 0.1;

  PhasePair() = default;
  PhasePair(double a, double b) : c0(a), c1(b) {
    if (c0 <= 0 || c1 <= 0) throw error("PhasePair: coefficients must be positive");
  }
  static PhasePair from_contrast(double cr) { return PhasePair(1.0, 1.0 / cr); }
};

struct GrfSpec {
  double corr_length = 0.2;  // in unit-square units
  std::uint64_t seed = 0;
  double threshold = 0.0;  // tau_x in GP-value units

  GrfSpec() = default;
  GrfSpec(double l, std::uint64_t s, double tau) : corr_length(l), seed(s), threshold(tau) {
    if (corr_length <= 0) throw error("GrfSpec: corr_length must be positive");
  }
};

/// c_j = c0 if x_j == 0 else c1, piecewise constant per pixel.
Eigen::VectorXd to_coefficients(const Microstructure& x, const PhasePair& phases);

/// Threshold level giving expected phase-1 volume fraction vf under a
/// zero-mean unit-variance GP marginal: tau = Phi^{-1}(1 - vf).
double threshold_for_volume_fraction(double vf);

}  // namespace genpanis
