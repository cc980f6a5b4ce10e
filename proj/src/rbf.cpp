#include "genpanis/rbf.hpp"

#include <cmath>

namespace genpanis {

TrialBasis TrialBasis::regular(int m) {
  if (m < 2) throw error("TrialBasis: m must be >= 2");
  TrialBasis b;
  b.m_ = m;
  b.width_ = 1.0 / (m - 1);
  b.centers_.resize(m * m, 2);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      b.centers_(j * m + i, 0) = static_cast<double>(i) / (m - 1);
      b.centers_(j * m + i, 1) = static_cast<double>(j) / (m - 1);
    }
  return b;
}

Eigen::VectorXd TrialBasis::eval(double x, double y) const {
  const double inv_w2 = 1.0 / (width_ * width_);
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) {
    const double dx = x - centers_(i, 0), dy = y - centers_(i, 1);
    v[i] = std::exp(-(dx * dx + dy * dy) * inv_w2);
  }
  return v;
}

void TrialBasis::eval_with_grad(double x, double y, Eigen::VectorXd& vals, Eigen::VectorXd& gx,
                                Eigen::VectorXd& gy) const {
  const double inv_w2 = 1.0 / (width_ * width_);
  vals.resize(size());
  gx.resize(size());
  gy.resize(size());
  for (int i = 0; i < size(); ++i) {
    const double dx = x - centers_(i, 0), dy = y - centers_(i, 1);
    const double v = std::exp(-(dx * dx + dy * dy) * inv_w2);
    vals[i] = v;
    gx[i] = -2.0 * dx * inv_w2 * v;
    gy[i] = -2.0 * dy * inv_w2 * v;
  }
}

Eigen::MatrixXd TrialBasis::eval_matrix(const Eigen::MatrixX2d& points) const {
  Eigen::MatrixXd out(points.rows(), size());
  for (int p = 0; p < points.rows(); ++p) out.row(p) = eval(points(p, 0), points(p, 1));
  return out;
}

Eigen::VectorXd TrialBasis::reconstruct(const Eigen::VectorXd& y,
                                        const Eigen::MatrixX2d& locations) const {
  if (y.size() != size()) throw error("reconstruct: coefficient size mismatch");
  return eval_matrix(locations) * y;
}

}  // namespace genpanis
