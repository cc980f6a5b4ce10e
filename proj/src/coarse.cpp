#include "genpanis/coarse.hpp"

#include <cmath>

namespace genpanis {

CoarseModel::CoarseModel(int n_div_c, const TrialBasis& basis)
    : mesh_(TriMesh::regular(n_div_c)), basis_(basis) {
  interior_ = mesh_.interior_nodes();
  n_interior_ = static_cast<int>(interior_.size());
  if (n_interior_ == 0) throw error("CoarseModel: mesh has no interior nodes");
  reduced_index_.assign(mesh_.n_nodes(), -1);
  for (int k = 0; k < n_interior_; ++k) reduced_index_[interior_[k]] = k;

  // All lower triangles are congruent, as are all upper ones.
  const double area = mesh_.element_area();
  for (int shape = 0; shape < 2; ++shape) {
    const auto g = mesh_.shape_gradients(shape);
    ref_stiffness_[shape] = area * g.transpose() * g;
  }
  Eigen::Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  ref_mass_ = m * (area / 12.0);

  darcy_load_unit_ = Eigen::VectorXd::Zero(mesh_.n_nodes());
  for (int e = 0; e < mesh_.n_elements(); ++e) {
    const auto tri = mesh_.elements().row(e);
    for (int a = 0; a < 3; ++a) darcy_load_unit_[tri[a]] += area / 3.0;
  }

  // Lifting: y solves G y = P Y with G_{ki} = eta_i(center_k) and P the P1
  // interpolation of the coarse solution at the RBF centers.
  const int d_y = basis_.size();
  interp_ = Eigen::MatrixXd::Zero(d_y, mesh_.n_nodes());
  for (int k = 0; k < d_y; ++k) {
    const auto loc = mesh_.locate(basis_.centers()(k, 0), basis_.centers()(k, 1));
    const auto tri = mesh_.elements().row(loc.element);
    for (int a = 0; a < 3; ++a) interp_(k, tri[a]) += loc.bary[a];
  }
  const Eigen::MatrixXd gram = basis_.eval_matrix(basis_.centers());
  gram_lu_.compute(gram);
  gram_lu_t_.compute(gram.transpose());

  const Eigen::VectorXd udiag = gram_lu_.matrixLU().diagonal().cwiseAbs();
  const double dmin = udiag.minCoeff();
  lift_cond_ = dmin > 0 ? udiag.maxCoeff() / dmin : std::numeric_limits<double>::infinity();
}

CoarseModel::Solution CoarseModel::solve(const Eigen::VectorXd& X,
                                         const PdeProblem& problem) const {
  if (X.size() != mesh_.n_elements()) throw error("CoarseModel::solve: dim(X) mismatch");
  if ((X.array() <= 0).any()) throw error("CoarseModel::solve: effective properties must be positive");
  if (!problem.dirichlet) throw error("CoarseModel::solve: problem has no Dirichlet function");

  const int nn = mesh_.n_nodes();
  Eigen::VectorXd y_full = Eigen::VectorXd::Zero(nn);
  for (int id = 0; id < nn; ++id)
    if (mesh_.node_on_boundary(id))
      y_full[id] = problem.dirichlet(mesh_.nodes()(id, 0), mesh_.nodes()(id, 1));

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_interior_, n_interior_);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_interior_);
  if (problem.kind == PdeKind::Darcy)
    for (int k = 0; k < n_interior_; ++k) rhs[k] = problem.source * darcy_load_unit_[interior_[k]];

  const double w2 = problem.omega * problem.omega;
  for (int e = 0; e < mesh_.n_elements(); ++e) {
    const auto tri = mesh_.elements().row(e);
    Eigen::Matrix3d ae;
    if (problem.kind == PdeKind::Darcy)
      ae = X[e] * ref_stiffness_[e % 2];
    else
      ae = -ref_stiffness_[e % 2] + w2 * X[e] * ref_mass_;
    for (int p = 0; p < 3; ++p) {
      const int rp = reduced_index_[tri[p]];
      if (rp < 0) continue;
      for (int q = 0; q < 3; ++q) {
        const int rq = reduced_index_[tri[q]];
        if (rq >= 0)
          a(rp, rq) += ae(p, q);
        else
          rhs[rp] -= ae(p, q) * y_full[tri[q]];
      }
    }
  }

  Solution sol;
  sol.kind = problem.kind;
  sol.omega = problem.omega;
  sol.factor.compute(a);
  const Eigen::VectorXd yi = sol.factor.solve(rhs);
  const double rel = (a * yi - rhs).norm() / std::max(rhs.norm(), 1e-30);
  if (!yi.allFinite() || rel > 1e-8)
    throw error("CoarseModel::solve: singular coarse system (relative residual " +
                format_double(rel) + ")");
  for (int k = 0; k < n_interior_; ++k) y_full[interior_[k]] = yi[k];
  sol.y_full = std::move(y_full);
  sol.y_coeff = lift(sol.y_full);
  return sol;
}

Eigen::VectorXd CoarseModel::lift(const Eigen::VectorXd& y_full_nodal) const {
  if (y_full_nodal.size() != mesh_.n_nodes()) throw error("CoarseModel::lift: size mismatch");
  return gram_lu_.solve(interp_ * y_full_nodal);
}

Eigen::VectorXd CoarseModel::lift_adjoint_full(const Eigen::VectorXd& ybar) const {
  return interp_.transpose() * gram_lu_t_.solve(ybar);
}

Eigen::VectorXd CoarseModel::vjp(const Solution& sol, const Eigen::VectorXd& cotangent) const {
  if (cotangent.size() != basis_.size()) throw error("CoarseModel::vjp: cotangent size mismatch");

  const Eigen::VectorXd ybar_full = lift_adjoint_full(cotangent);
  Eigen::VectorXd ybar_int(n_interior_);
  for (int k = 0; k < n_interior_; ++k) ybar_int[k] = ybar_full[interior_[k]];

  // A is symmetric for both PDE kinds, so the adjoint solve reuses the factor.
  const Eigen::VectorXd lambda = sol.factor.solve(ybar_int);

  Eigen::VectorXd lambda_full = Eigen::VectorXd::Zero(mesh_.n_nodes());
  for (int k = 0; k < n_interior_; ++k) lambda_full[interior_[k]] = lambda[k];

  const double w2 = sol.omega * sol.omega;
  Eigen::VectorXd xbar(mesh_.n_elements());
  for (int e = 0; e < mesh_.n_elements(); ++e) {
    const auto tri = mesh_.elements().row(e);
    const Eigen::Matrix3d dae =
        sol.kind == PdeKind::Darcy ? Eigen::Matrix3d(ref_stiffness_[e % 2])
                                   : Eigen::Matrix3d(w2 * ref_mass_);
    double acc = 0.0;
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) acc += lambda_full[tri[p]] * dae(p, q) * sol.y_full[tri[q]];
    xbar[e] = -acc;
  }
  return xbar;
}

}  // namespace genpanis
