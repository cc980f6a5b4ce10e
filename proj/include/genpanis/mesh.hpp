#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "genpanis/grid.hpp"

namespace genpanis {

/// Conforming triangulation of the unit square: n_div x n_div cells, each
/// split into two triangles along the (lower-left -> upper-right) diagonal.
/// Node (i,j) sits at (i/n, j/n) with id j*(n+1)+i. Element 2*(j*n+i) is the
/// lower triangle {(i,j),(i+1,j),(i+1,j+1)}, +1 the upper {(i,j),(i+1,j+1),(i,j+1)}.
class TriMesh {
 public:
  static TriMesh regular(int n_div);

  int n_div() const { return n_div_; }
  int n_nodes() const { return static_cast<int>(nodes_.rows()); }
  int n_elements() const { return static_cast<int>(elements_.rows()); }
  const Eigen::MatrixX2d& nodes() const { return nodes_; }
  const Eigen::MatrixX3i& elements() const { return elements_; }

  int node_id(int i, int j) const { return j * (n_div_ + 1) + i; }
  bool node_on_boundary(int id) const {
    const int i = id % (n_div_ + 1), j = id / (n_div_ + 1);
    return i == 0 || j == 0 || i == n_div_ || j == n_div_;
  }

  /// Element containing (x,y) plus barycentric weights of its three nodes.
  struct Location {
    int element;
    std::array<double, 3> bary;
  };
  Location locate(double x, double y) const;

  double element_area() const { return 0.5 / (n_div_ * static_cast<double>(n_div_)); }

  /// Constant P1 shape-function gradients of element e: 2x3 matrix, column k
  /// is grad(phi_k).
  Eigen::Matrix<double, 2, 3> shape_gradients(int e) const;

  /// Centroid of element e.
  Eigen::Vector2d centroid(int e) const;

  std::vector<int> boundary_nodes() const;
  std::vector<int> interior_nodes() const;

 private:
  int n_div_ = 0;
  Eigen::MatrixX2d nodes_;
  Eigen::MatrixX3i elements_;
};

/// Map a per-pixel field onto mesh elements: each element takes the value of
/// the pixel covering its centroid.
Eigen::VectorXd pixels_to_elements(const Eigen::VectorXd& pixel_field, const GridSpec& grid,
                                   const TriMesh& mesh);

}  // namespace genpanis
