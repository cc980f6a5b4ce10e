#include "genpanis/nn.hpp"

namespace genpanis::nn {

namespace {

void fill_normal(Eigen::MatrixXd& m, Rng& rng, double std) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) m(r, c) = std * rng.normal();
}

}  // namespace

void Linear::init_he(Rng& rng) {
  fill_normal(weight, rng, std::sqrt(2.0 / static_cast<double>(weight.cols())));
  bias.setZero();
}

void Linear::init_normal(Rng& rng, double std) {
  fill_normal(weight, rng, std);
  bias.setZero();
}

Eigen::VectorXd Linear::backward(const Eigen::VectorXd& x, const Eigen::VectorXd& dy,
                                 Linear& g) const {
  g.weight.noalias() += dy * x.transpose();
  g.bias += dy;
  return weight.transpose() * dy;
}

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride_, int pad_)
    : in_c(in_channels),
      out_c(out_channels),
      k(kernel),
      stride(stride_),
      pad(pad_),
      weight(Eigen::MatrixXd::Zero(out_channels, in_channels * kernel * kernel)),
      bias(Eigen::VectorXd::Zero(out_channels)) {}

void Conv2d::init_he(Rng& rng) {
  fill_normal(weight, rng, std::sqrt(2.0 / static_cast<double>(weight.cols())));
  bias.setZero();
}

Tensor3 Conv2d::forward(const Tensor3& x) const {
  const int oh = out_size(x.h), ow = out_size(x.w);
  Tensor3 y(out_c, oh, ow);
  for (int o = 0; o < out_c; ++o)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = bias[o];
        for (int i = 0; i < in_c; ++i)
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= x.w) continue;
              acc += weight(o, (i * k + ky) * k + kx) * x.at(i, iy, ix);
            }
          }
        y.at(o, oy, ox) = acc;
      }
  return y;
}

Tensor3 Conv2d::backward(const Tensor3& x, const Tensor3& dy, Conv2d& g) const {
  Tensor3 dx(x.c, x.h, x.w);
  for (int o = 0; o < out_c; ++o)
    for (int oy = 0; oy < dy.h; ++oy)
      for (int ox = 0; ox < dy.w; ++ox) {
        const double d = dy.at(o, oy, ox);
        g.bias[o] += d;
        for (int i = 0; i < in_c; ++i)
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= x.w) continue;
              g.weight(o, (i * k + ky) * k + kx) += d * x.at(i, iy, ix);
              dx.at(i, iy, ix) += d * weight(o, (i * k + ky) * k + kx);
            }
          }
      }
  return dx;
}

Deconv2d::Deconv2d(int in_channels, int out_channels, int kernel, int pad_)
    : in_c(in_channels),
      out_c(out_channels),
      k(kernel),
      pad(pad_),
      weight(Eigen::MatrixXd::Zero(in_channels, out_channels * kernel * kernel)),
      bias(Eigen::VectorXd::Zero(out_channels)) {}

void Deconv2d::init_he(Rng& rng) {
  fill_normal(weight, rng, std::sqrt(2.0 / static_cast<double>(in_c * k * k)));
  bias.setZero();
}

Tensor3 Deconv2d::forward(const Tensor3& x) const {
  const int oh = out_size(x.h), ow = out_size(x.w);
  Tensor3 y(out_c, oh, ow);
  for (int o = 0; o < out_c; ++o)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = bias[o];
        for (int i = 0; i < in_c; ++i)
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy + pad - ky;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox + pad - kx;
              if (ix < 0 || ix >= x.w) continue;
              acc += weight(i, (o * k + ky) * k + kx) * x.at(i, iy, ix);
            }
          }
        y.at(o, oy, ox) = acc;
      }
  return y;
}

Tensor3 Deconv2d::backward(const Tensor3& x, const Tensor3& dy, Deconv2d& g) const {
  Tensor3 dx(x.c, x.h, x.w);
  for (int o = 0; o < out_c; ++o)
    for (int oy = 0; oy < dy.h; ++oy)
      for (int ox = 0; ox < dy.w; ++ox) {
        const double d = dy.at(o, oy, ox);
        g.bias[o] += d;
        for (int i = 0; i < in_c; ++i)
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy + pad - ky;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox + pad - kx;
              if (ix < 0 || ix >= x.w) continue;
              g.weight(i, (o * k + ky) * k + kx) += d * x.at(i, iy, ix);
              dx.at(i, iy, ix) += d * weight(i, (o * k + ky) * k + kx);
            }
          }
      }
  return dx;
}

Tensor3 AvgPool2::forward(const Tensor3& x) {
  const int oh = x.h / 2, ow = x.w / 2;
  Tensor3 y(x.c, oh, ow);
  for (int c = 0; c < x.c; ++c)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        y.at(c, oy, ox) = 0.25 * (x.at(c, 2 * oy, 2 * ox) + x.at(c, 2 * oy, 2 * ox + 1) +
                                  x.at(c, 2 * oy + 1, 2 * ox) + x.at(c, 2 * oy + 1, 2 * ox + 1));
  return y;
}

Tensor3 AvgPool2::backward(int in_h, int in_w, const Tensor3& dy) {
  Tensor3 dx(dy.c, in_h, in_w);
  for (int c = 0; c < dy.c; ++c)
    for (int oy = 0; oy < dy.h; ++oy)
      for (int ox = 0; ox < dy.w; ++ox) {
        const double d = 0.25 * dy.at(c, oy, ox);
        dx.at(c, 2 * oy, 2 * ox) = d;
        dx.at(c, 2 * oy, 2 * ox + 1) = d;
        dx.at(c, 2 * oy + 1, 2 * ox) = d;
        dx.at(c, 2 * oy + 1, 2 * ox + 1) = d;
      }
  return dx;
}

Tensor3 ChannelNorm::forward(const Tensor3& x, Cache& cache) const {
  const int n = x.h * x.w;
  Tensor3 y(x.c, x.h, x.w);
  cache.inv_std.resize(x.c);
  cache.xhat = Tensor3(x.c, x.h, x.w);
  for (int c = 0; c < x.c; ++c) {
    const auto seg = x.data.segment(c * n, n);
    const double mean = seg.mean();
    const double var = (seg.array() - mean).square().mean();
    const double inv_std = 1.0 / std::sqrt(var + kEps);
    cache.inv_std[c] = inv_std;
    cache.xhat.data.segment(c * n, n) = (seg.array() - mean) * inv_std;
    y.data.segment(c * n, n) = gamma[c] * cache.xhat.data.segment(c * n, n).array() + beta[c];
  }
  return y;
}

Tensor3 ChannelNorm::backward(const Cache& cache, const Tensor3& dy, ChannelNorm& g) const {
  const int n = dy.h * dy.w;
  Tensor3 dx(dy.c, dy.h, dy.w);
  for (int c = 0; c < dy.c; ++c) {
    const auto dseg = dy.data.segment(c * n, n);
    const auto xhat = cache.xhat.data.segment(c * n, n);
    g.beta[c] += dseg.sum();
    g.gamma[c] += dseg.dot(xhat);
    const Eigen::ArrayXd dxhat = dseg.array() * gamma[c];
    const double m1 = dxhat.mean();
    const double m2 = (dxhat * xhat.array()).mean();
    dx.data.segment(c * n, n) = cache.inv_std[c] * (dxhat - m1 - xhat.array() * m2);
  }
  return dx;
}

Tensor3 softplus(const Tensor3& x) {
  Tensor3 y(x.c, x.h, x.w);
  for (int i = 0; i < x.size(); ++i) y.data[i] = softplus(x.data[i]);
  return y;
}

Tensor3 softplus_backward(const Tensor3& x, const Tensor3& dy) {
  Tensor3 dx(x.c, x.h, x.w);
  for (int i = 0; i < x.size(); ++i) dx.data[i] = dy.data[i] * sigmoid(x.data[i]);
  return dx;
}

void Mlp::init_he(Rng& rng) {
  l1.init_he(rng);
  l2.init_he(rng);
  l3.init_he(rng);
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Trace* tr) const {
  Eigen::VectorXd pre1 = l1.forward(x);
  Eigen::VectorXd act1 = pre1.unaryExpr([](double v) { return leaky_relu(v); });
  Eigen::VectorXd pre2 = l2.forward(act1);
  Eigen::VectorXd act2 = pre2.unaryExpr([](double v) { return leaky_relu(v); });
  Eigen::VectorXd out = l3.forward(act2);
  if (tr) {
    tr->x = x;
    tr->pre1 = std::move(pre1);
    tr->act1 = std::move(act1);
    tr->pre2 = std::move(pre2);
    tr->act2 = std::move(act2);
  }
  return out;
}

Eigen::VectorXd Mlp::backward(const Trace& tr, const Eigen::VectorXd& dy, Mlp& g) const {
  Eigen::VectorXd da2 = l3.backward(tr.act2, dy, g.l3);
  Eigen::VectorXd dp2 =
      da2.cwiseProduct(tr.pre2.unaryExpr([](double v) { return leaky_relu_grad(v); }));
  Eigen::VectorXd da1 = l2.backward(tr.act1, dp2, g.l2);
  Eigen::VectorXd dp1 =
      da1.cwiseProduct(tr.pre1.unaryExpr([](double v) { return leaky_relu_grad(v); }));
  return l1.backward(tr.x, dp1, g.l1);
}

}  // namespace genpanis::nn
