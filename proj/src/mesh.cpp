#include "genpanis/mesh.hpp"

#include <cmath>

namespace genpanis {

TriMesh TriMesh::regular(int n_div) {
  if (n_div < 1) throw error("TriMesh: n_div must be >= 1");
  TriMesh m;
  m.n_div_ = n_div;
  const int np = n_div + 1;
  m.nodes_.resize(np * np, 2);
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < np; ++i) {
      m.nodes_(j * np + i, 0) = static_cast<double>(i) / n_div;
      m.nodes_(j * np + i, 1) = static_cast<double>(j) / n_div;
    }
  m.elements_.resize(2 * n_div * n_div, 3);
  for (int j = 0; j < n_div; ++j)
    for (int i = 0; i < n_div; ++i) {
      const int a = m.node_id(i, j);
      const int b = m.node_id(i + 1, j);
      const int c = m.node_id(i + 1, j + 1);
      const int d = m.node_id(i, j + 1);
      const int e = 2 * (j * n_div + i);
      m.elements_.row(e) << a, b, c;      // lower triangle, ccw
      m.elements_.row(e + 1) << a, c, d;  // upper triangle, ccw
    }
  return m;
}

TriMesh::Location TriMesh::locate(double x, double y) const {
  if (x < -1e-12 || x > 1 + 1e-12 || y < -1e-12 || y > 1 + 1e-12)
    throw error("TriMesh::locate: point outside domain");
  x = std::min(std::max(x, 0.0), 1.0);
  y = std::min(std::max(y, 0.0), 1.0);
  const double u = x * n_div_, v = y * n_div_;
  int ci = std::min(static_cast<int>(std::floor(u)), n_div_ - 1);
  int cj = std::min(static_cast<int>(std::floor(v)), n_div_ - 1);
  const double lx = u - ci, ly = v - cj;  // local coords in [0,1]^2
  Location loc;
  if (ly <= lx) {  // lower triangle {a,b,c}: a=(0,0) b=(1,0) c=(1,1)
    loc.element = 2 * (cj * n_div_ + ci);
    loc.bary = {1.0 - lx, lx - ly, ly};
  } else {  // upper triangle {a,c,d}: a=(0,0) c=(1,1) d=(0,1)
    loc.element = 2 * (cj * n_div_ + ci) + 1;
    loc.bary = {1.0 - ly, lx, ly - lx};
  }
  return loc;
}

Eigen::Matrix<double, 2, 3> TriMesh::shape_gradients(int e) const {
  const auto tri = elements_.row(e);
  const Eigen::Vector2d p0 = nodes_.row(tri[0]);
  const Eigen::Vector2d p1 = nodes_.row(tri[1]);
  const Eigen::Vector2d p2 = nodes_.row(tri[2]);
  const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  Eigen::Matrix<double, 2, 3> g;
  g.col(0) << (p1.y() - p2.y()) / det, (p2.x() - p1.x()) / det;
  g.col(1) << (p2.y() - p0.y()) / det, (p0.x() - p2.x()) / det;
  g.col(2) << (p0.y() - p1.y()) / det, (p1.x() - p0.x()) / det;
  return g;
}

Eigen::Vector2d TriMesh::centroid(int e) const {
  const auto tri = elements_.row(e);
  return (nodes_.row(tri[0]) + nodes_.row(tri[1]) + nodes_.row(tri[2])) / 3.0;
}

std::vector<int> TriMesh::boundary_nodes() const {
  std::vector<int> out;
  for (int id = 0; id < n_nodes(); ++id)
    if (node_on_boundary(id)) out.push_back(id);
  return out;
}

std::vector<int> TriMesh::interior_nodes() const {
  std::vector<int> out;
  for (int id = 0; id < n_nodes(); ++id)
    if (!node_on_boundary(id)) out.push_back(id);
  return out;
}

Eigen::VectorXd pixels_to_elements(const Eigen::VectorXd& pixel_field, const GridSpec& grid,
                                   const TriMesh& mesh) {
  if (pixel_field.size() != grid.cells()) throw error("pixels_to_elements: size mismatch");
  Eigen::VectorXd c(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const Eigen::Vector2d ctr = mesh.centroid(e);
    c[e] = pixel_field[grid.pixel_index(ctr.x(), ctr.y())];
  }
  return c;
}

}  // namespace genpanis
