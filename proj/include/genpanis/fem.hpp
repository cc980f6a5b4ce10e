#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "genpanis/mesh.hpp"
#include "genpanis/pde.hpp"

namespace genpanis {

struct NodalSolution {
  const TriMesh* mesh = nullptr;
  Eigen::VectorXd values;
};

/// Assembled linear system before boundary-condition elimination.
struct Assembled {
  Eigen::SparseMatrix<double> stiffness;  // sum_e c_e * K_e (Darcy bilinear part)
  Eigen::SparseMatrix<double> system;     // full operator (== stiffness for Darcy)
  Eigen::VectorXd load;
};

/// Fine-scale P1 reference solver on a regular triangular mesh.
class FineSolver {
 public:
  FineSolver(int n_div, PdeProblem problem);

  const TriMesh& mesh() const { return mesh_; }
  const PdeProblem& problem() const { return problem_; }

  /// Assemble for per-element coefficients (Darcy requires positive c).
  Assembled assemble(const Eigen::VectorXd& c_per_element) const;

  /// Solve with per-pixel coefficients (mapped onto elements by centroid).
  NodalSolution solve_pixels(const Eigen::VectorXd& c_pixels, const GridSpec& grid) const;
  NodalSolution solve_elements(const Eigen::VectorXd& c_per_element) const;

 private:
  TriMesh mesh_;
  PdeProblem problem_;
};

/// Piecewise-linear interpolation of a nodal solution at arbitrary points.
Eigen::VectorXd observe(const NodalSolution& u, const Eigen::MatrixX2d& locations);

/// Additive Gaussian noise at a prescribed signal-to-noise ratio:
/// sigma_n = |clean|_2 / (snr * sqrt(d_obs)). Returns (noisy, sigma_n).
std::pair<Eigen::VectorXd, double> add_noise(const Eigen::VectorXd& clean, double snr,
                                             std::uint64_t seed);

}  // namespace genpanis
