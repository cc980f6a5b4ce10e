#pragma once

#include <Eigen/Dense>

#include "genpanis/mesh.hpp"
#include "genpanis/pde.hpp"
#include "genpanis/rbf.hpp"

namespace genpanis {

/// The differentiable physics bottleneck: effective per-element properties X
/// go through a coarse P1 solve to nodal values Y (boundary values attached),
/// then a precomputed linear lifting maps Y to trial-basis coefficients y.
/// Exact adjoint gradients are provided through the whole chain.
class CoarseModel {
 public:
  CoarseModel(int n_div_c, const TrialBasis& basis);

  int dim_x() const { return mesh_.n_elements(); }         // 2 n_c^2
  int dim_y_nodal() const { return n_interior_; }          // interior nodes
  int dim_y() const { return basis_.size(); }              // trial coefficients
  const TriMesh& mesh() const { return mesh_; }
  const TrialBasis& basis() const { return basis_; }
  double lift_condition_estimate() const { return lift_cond_; }
  bool lift_ill_conditioned() const { return lift_cond_ > 1e12; }

  /// Cached forward state; required by the adjoint.
  struct Solution {
    Eigen::VectorXd y_full;                       // all nodes, boundary values attached
    Eigen::VectorXd y_coeff;                      // lifted trial coefficients
    Eigen::PartialPivLU<Eigen::MatrixXd> factor;  // reduced system (symmetric for both kinds)
    PdeKind kind;
    double omega = 0.0;
  };

  /// Solve the coarse PDE for properties X under the given problem (boundary
  /// values come from `problem`, so new BCs need no retraining anywhere).
  Solution solve(const Eigen::VectorXd& X, const PdeProblem& problem) const;

  /// Coarse solve only (full nodal vector with boundary values).
  Eigen::VectorXd coarse_solve(const Eigen::VectorXd& X, const PdeProblem& problem) const {
    return solve(X, problem).y_full;
  }

  /// Linear lifting h: collocation of the coarse P1 interpolant at the RBF
  /// centers, through the precomputed factorized Gram system.
  Eigen::VectorXd lift(const Eigen::VectorXd& y_full_nodal) const;

  /// Gradient of (cotangent . y_coeff) with respect to X.
  Eigen::VectorXd vjp(const Solution& sol, const Eigen::VectorXd& y_coeff_cotangent) const;

 private:
  Eigen::VectorXd lift_adjoint_full(const Eigen::VectorXd& ybar) const;  // P^T G^-T ybar

  TriMesh mesh_;
  TrialBasis basis_;
  int n_interior_ = 0;
  std::vector<int> interior_;            // node ids
  std::vector<int> reduced_index_;       // node id -> interior index (-1 for bc)
  Eigen::Matrix3d ref_stiffness_[2];     // lower/upper triangle shapes
  Eigen::Matrix3d ref_mass_;
  Eigen::VectorXd darcy_load_unit_;      // load vector for f = 1
  Eigen::MatrixXd interp_;               // P: centers x nodes (coarse interpolation)
  Eigen::PartialPivLU<Eigen::MatrixXd> gram_lu_;     // G
  Eigen::PartialPivLU<Eigen::MatrixXd> gram_lu_t_;   // G^T
  double lift_cond_ = 0.0;
};

}  // namespace genpanis
