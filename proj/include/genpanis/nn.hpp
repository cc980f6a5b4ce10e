#pragma once

#include <Eigen/Dense>

#include "genpanis/common.hpp"

namespace genpanis::nn {

inline double softplus(double x) { return (x > 0 ? x : 0.0) + std::log1p(std::exp(-std::abs(x))); }
inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
constexpr double kLeakySlope = 0.01;
inline double leaky_relu(double x) { return x > 0 ? x : kLeakySlope * x; }
inline double leaky_relu_grad(double x) { return x > 0 ? 1.0 : kLeakySlope; }

/// Channel-major image tensor (C x H x W), contiguous.
struct Tensor3 {
  int c = 0, h = 0, w = 0;
  Eigen::VectorXd data;

  Tensor3() = default;
  Tensor3(int c_, int h_, int w_) : c(c_), h(h_), w(w_), data(Eigen::VectorXd::Zero(c_ * h_ * w_)) {}
  double& at(int ci, int yi, int xi) { return data[(ci * h + yi) * w + xi]; }
  double at(int ci, int yi, int xi) const { return data[(ci * h + yi) * w + xi]; }
  int size() const { return c * h * w; }
};

struct Linear {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  Linear() = default;
  Linear(int out, int in) : weight(Eigen::MatrixXd::Zero(out, in)), bias(Eigen::VectorXd::Zero(out)) {}
  void init_he(Rng& rng);
  void init_normal(Rng& rng, double std);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const { return weight * x + bias; }
  /// Accumulates parameter gradients into `g`, returns dL/dx.
  Eigen::VectorXd backward(const Eigen::VectorXd& x, const Eigen::VectorXd& dy, Linear& g) const;
};

struct Conv2d {
  int in_c = 0, out_c = 0, k = 0, stride = 1, pad = 0;
  Eigen::MatrixXd weight;  // out_c x (in_c*k*k)
  Eigen::VectorXd bias;    // out_c

  Conv2d() = default;
  Conv2d(int in_channels, int out_channels, int kernel, int stride_, int pad_);
  void init_he(Rng& rng);
  int out_size(int in) const { return (in + 2 * pad - k) / stride + 1; }

  Tensor3 forward(const Tensor3& x) const;
  Tensor3 backward(const Tensor3& x, const Tensor3& dy, Conv2d& g) const;
};

/// Transposed convolution, stride 1 (output grows by k - 1 - 2*pad).
struct Deconv2d {
  int in_c = 0, out_c = 0, k = 0, pad = 0;
  Eigen::MatrixXd weight;  // in_c x (out_c*k*k)
  Eigen::VectorXd bias;    // out_c

  Deconv2d() = default;
  Deconv2d(int in_channels, int out_channels, int kernel, int pad_);
  void init_he(Rng& rng);
  int out_size(int in) const { return in - 1 - 2 * pad + k; }

  Tensor3 forward(const Tensor3& x) const;
  Tensor3 backward(const Tensor3& x, const Tensor3& dy, Deconv2d& g) const;
};

/// 2x2 average pooling, stride 2, floor mode (trailing row/col dropped).
struct AvgPool2 {
  static Tensor3 forward(const Tensor3& x);
  static Tensor3 backward(int in_h, int in_w, const Tensor3& dy);
};

/// Per-sample, per-channel normalization over the spatial extent with a
/// learned scale/shift. Deterministic for a single sample, which keeps every
/// evaluation path pure (no cross-batch statistics).
struct ChannelNorm {
  Eigen::VectorXd gamma, beta;
  static constexpr double kEps = 1e-5;

  ChannelNorm() = default;
  explicit ChannelNorm(int channels)
      : gamma(Eigen::VectorXd::Ones(channels)), beta(Eigen::VectorXd::Zero(channels)) {}

  struct Cache {
    Eigen::VectorXd inv_std;  // per channel
    Tensor3 xhat;
  };
  Tensor3 forward(const Tensor3& x, Cache& cache) const;
  Tensor3 backward(const Cache& cache, const Tensor3& dy, ChannelNorm& g) const;
};

/// Element-wise softplus over a tensor, caching pre-activations via the input.
Tensor3 softplus(const Tensor3& x);
Tensor3 softplus_backward(const Tensor3& x, const Tensor3& dy);

/// Dense 3-layer LeakyReLU MLP (in -> hidden -> hidden -> out).
struct Mlp {
  Linear l1, l2, l3;

  Mlp() = default;
  Mlp(int in, int hidden, int out) : l1(hidden, in), l2(hidden, hidden), l3(out, hidden) {}
  void init_he(Rng& rng);

  struct Trace {
    Eigen::VectorXd x, pre1, pre2, act1, act2;
  };
  Eigen::VectorXd forward(const Eigen::VectorXd& x, Trace* tr = nullptr) const;
  Eigen::VectorXd backward(const Trace& tr, const Eigen::VectorXd& dy, Mlp& g) const;
};

}  // namespace genpanis::nn
