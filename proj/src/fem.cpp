#include "genpanis/fem.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace genpanis {

namespace {

// P1 element mass matrix: area/12 * [[2,1,1],[1,2,1],[1,1,2]].
Eigen::Matrix3d element_mass(double area) {
  Eigen::Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return m * (area / 12.0);
}

}  // namespace

FineSolver::FineSolver(int n_div, PdeProblem problem)
    : mesh_(TriMesh::regular(n_div)), problem_(std::move(problem)) {
  if (!problem_.dirichlet) throw error("FineSolver: problem has no Dirichlet function");
}

Assembled FineSolver::assemble(const Eigen::VectorXd& c_per_element) const {
  const int ne = mesh_.n_elements();
  if (c_per_element.size() != ne) throw error("assemble: coefficient count != element count");
  if (problem_.kind == PdeKind::Darcy && (c_per_element.array() <= 0).any())
    throw error("assemble: Darcy coefficients must be positive");

  const int nn = mesh_.n_nodes();
  const double area = mesh_.element_area();
  std::vector<Eigen::Triplet<double>> stiff_t, mass_t;
  stiff_t.reserve(static_cast<std::size_t>(ne) * 9);
  if (problem_.kind == PdeKind::Helmholtz) mass_t.reserve(static_cast<std::size_t>(ne) * 9);

  for (int e = 0; e < ne; ++e) {
    const auto tri = mesh_.elements().row(e);
    const auto grads = mesh_.shape_gradients(e);
    const Eigen::Matrix3d ke = area * grads.transpose() * grads;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        // Stiffness carries the coefficient for Darcy; Helmholtz puts the
        // coefficient on the mass term instead.
        const double cs = problem_.kind == PdeKind::Darcy ? c_per_element[e] : 1.0;
        stiff_t.emplace_back(tri[a], tri[b], cs * ke(a, b));
      }
    if (problem_.kind == PdeKind::Helmholtz) {
      const Eigen::Matrix3d me = element_mass(area) * c_per_element[e];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) mass_t.emplace_back(tri[a], tri[b], me(a, b));
    }
  }

  Assembled out;
  out.stiffness.resize(nn, nn);
  out.stiffness.setFromTriplets(stiff_t.begin(), stiff_t.end());

  if (problem_.kind == PdeKind::Darcy) {
    out.system = out.stiffness;
    // Constant source: nodal load f * area/3 per adjacent element.
    out.load = Eigen::VectorXd::Zero(nn);
    for (int e = 0; e < ne; ++e) {
      const auto tri = mesh_.elements().row(e);
      for (int a = 0; a < 3; ++a) out.load[tri[a]] += problem_.source * area / 3.0;
    }
  } else {
    // Weak form of lap u + w^2 c u = 0: -K + w^2 M(c); symmetric, indefinite.
    Eigen::SparseMatrix<double> mass(nn, nn);
    mass.setFromTriplets(mass_t.begin(), mass_t.end());
    out.system = -out.stiffness + problem_.omega * problem_.omega * mass;
    out.load = Eigen::VectorXd::Zero(nn);
  }
  return out;
}

NodalSolution FineSolver::solve_elements(const Eigen::VectorXd& c_per_element) const {
  Assembled sys = assemble(c_per_element);
  const int nn = mesh_.n_nodes();

  Eigen::VectorXd u = Eigen::VectorXd::Zero(nn);
  std::vector<char> is_bc(nn, 0);
  for (int id : mesh_.boundary_nodes()) {
    is_bc[id] = 1;
    u[id] = problem_.dirichlet(mesh_.nodes()(id, 0), mesh_.nodes()(id, 1));
  }
  const std::vector<int> interior = mesh_.interior_nodes();
  const int ni = static_cast<int>(interior.size());
  std::vector<int> reduced_index(nn, -1);
  for (int k = 0; k < ni; ++k) reduced_index[interior[k]] = k;

  // Symmetric elimination: rhs_I -= A_IB u0_B, keep A_II.
  Eigen::VectorXd rhs(ni);
  for (int k = 0; k < ni; ++k) rhs[k] = sys.load[interior[k]];
  std::vector<Eigen::Triplet<double>> at;
  at.reserve(static_cast<std::size_t>(sys.system.nonZeros()));
  for (int col = 0; col < sys.system.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.system, col); it; ++it) {
      const int r = static_cast<int>(it.row()), c = col;
      if (is_bc[r]) continue;
      if (is_bc[c])
        rhs[reduced_index[r]] -= it.value() * u[c];
      else
        at.emplace_back(reduced_index[r], reduced_index[c], it.value());
    }
  Eigen::SparseMatrix<double> aii(ni, ni);
  aii.setFromTriplets(at.begin(), at.end());

  Eigen::VectorXd ui;
  if (problem_.kind == PdeKind::Darcy) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(aii);
    if (solver.info() != Eigen::Success) throw error("FineSolver: Darcy factorization failed");
    ui = solver.solve(rhs);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver(aii);
    if (solver.info() != Eigen::Success)
      throw error("FineSolver: Helmholtz system is singular (resonance?)");
    ui = solver.solve(rhs);
  }
  const double rhs_scale = std::max(rhs.norm(), 1e-30);
  const double rel_res = (aii * ui - rhs).norm() / rhs_scale;
  if (!ui.allFinite() || rel_res > 1e-10)
    throw error("FineSolver: solve failed (relative residual " + format_double(rel_res) + ")");

  for (int k = 0; k < ni; ++k) u[interior[k]] = ui[k];
  return NodalSolution{&mesh_, std::move(u)};
}

NodalSolution FineSolver::solve_pixels(const Eigen::VectorXd& c_pixels,
                                       const GridSpec& grid) const {
  return solve_elements(pixels_to_elements(c_pixels, grid, mesh_));
}

Eigen::VectorXd observe(const NodalSolution& u, const Eigen::MatrixX2d& locations) {
  if (!u.mesh) throw error("observe: solution has no mesh");
  Eigen::VectorXd out(locations.rows());
  for (int i = 0; i < locations.rows(); ++i) {
    const auto loc = u.mesh->locate(locations(i, 0), locations(i, 1));
    const auto tri = u.mesh->elements().row(loc.element);
    out[i] = loc.bary[0] * u.values[tri[0]] + loc.bary[1] * u.values[tri[1]] +
             loc.bary[2] * u.values[tri[2]];
  }
  return out;
}

std::pair<Eigen::VectorXd, double> add_noise(const Eigen::VectorXd& clean, double snr,
                                             std::uint64_t seed) {
  if (snr <= 0) throw error("add_noise: SNR must be positive");
  const double norm = clean.norm();
  if (norm == 0) throw error("add_noise: clean signal has zero norm");
  const double sigma_n = norm / (snr * std::sqrt(static_cast<double>(clean.size())));
  Rng rng(seed);
  Eigen::VectorXd noisy = clean;
  for (int i = 0; i < noisy.size(); ++i) noisy[i] += sigma_n * rng.normal();
  return {std::move(noisy), sigma_n};
}

}  // namespace genpanis
