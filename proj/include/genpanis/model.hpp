#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "genpanis/config.hpp"
#include "genpanis/flow.hpp"
#include "genpanis/grid.hpp"
#include "genpanis/mesh.hpp"
#include "genpanis/nn.hpp"
#include "genpanis/pde.hpp"

namespace genpanis {

/// Architecture hyperparameters. The desk defaults train in minutes on a
/// laptop; paper() restores the full-scale sizes.
struct ModelConfig {
  int n_pix = 32;
  int d_z = 16;
  int flow_layers = 6;  // 0 = standard-normal prior (the ablation baseline)
  int flow_hidden = 64;
  int coarse_div = 8;
  int rbf_m = 16;       // trial-basis grid per side (d_y = m^2)
  int weight_grid = 9;  // weight-function grid per side
  int quad_grid = 33;   // quadrature grid per side
  int prop_c1 = 8, prop_c2 = 24, prop_c3 = 8;
  int enc_c1 = 4, enc_c2 = 12, enc_c3 = 4;
  int d_obs_labeled = 0;  // dimension of sigma_y (0 when no labeled data)

  static ModelConfig desk() { return {}; }
  static ModelConfig paper();

  int d_x() const { return n_pix * n_pix; }
  int dim_X() const { return 2 * coarse_div * coarse_div; }
  int image_side() const { return n_pix + 1; }
  int nodal_side() const { return coarse_div + 1; }
  /// Pooling stages after the second conv so the deconv lands on coarse_div+1.
  int extra_pools() const;
  void validate() const;

  void to_config(Config& c, const std::string& prefix = "model.") const;
  static ModelConfig from_config(const Config& c, const std::string& prefix = "model.");
  bool operator==(const ModelConfig&) const = default;
};

/// Logistic (Bernoulli) microstructure decoder: logits a = W z + b.
struct LogisticDecoder {
  Eigen::MatrixXd weight;  // d_x x d_z
  Eigen::VectorXd bias;    // d_x
  static constexpr double kLogitClamp = 30.0;

  LogisticDecoder() = default;
  LogisticDecoder(int d_x, int d_z)
      : weight(Eigen::MatrixXd::Zero(d_x, d_z)), bias(Eigen::VectorXd::Zero(d_x)) {}

  Eigen::VectorXd logits(const Eigen::VectorXd& z) const;  // clamped
  Eigen::VectorXd probs(const Eigen::VectorXd& z) const;
  double loglik(const std::vector<std::uint8_t>& x, const Eigen::VectorXd& z) const;
  /// Accumulates dvalue * d loglik/d params into g; returns dvalue * d/dz.
  Eigen::VectorXd loglik_backward(const std::vector<std::uint8_t>& x, const Eigen::VectorXd& z,
                                  double dvalue, LogisticDecoder& g) const;
};

/// z -> positive effective properties X, one per coarse element. The network
/// emits a nodal field on the coarse mesh; each triangle takes the softplus
/// of its nodal mean.
class PropNet {
 public:
  nn::Linear fc;
  nn::Conv2d conv1, conv2;
  nn::Deconv2d deconv1, deconv2;
  nn::ChannelNorm norm1, norm2, norm3;

  PropNet() = default;
  explicit PropNet(const ModelConfig& cfg);
  void init(Rng& rng);

  struct Trace {
    Eigen::VectorXd z;
    nn::Tensor3 t0, c1pre, c1act, p1, c2pre, c2act, n2;
    std::vector<nn::Tensor3> pool_in;  // inputs of the extra pools
    nn::Tensor3 pe, d1pre, d1act, n3;
    nn::ChannelNorm::Cache nc1, nc2, nc3;
    Eigen::VectorXd nodal;       // deconv2 output, flattened
    Eigen::VectorXd x_pre;       // per-element nodal mean (pre-softplus)
  };
  Eigen::VectorXd forward(const Eigen::VectorXd& z, Trace* tr = nullptr) const;
  Eigen::VectorXd backward(const Trace& tr, const Eigen::VectorXd& dX, PropNet& g) const;

 private:
  int n_pix_ = 0, coarse_div_ = 0, extra_pools_ = 0;
  Eigen::MatrixX3i elements_;  // coarse connectivity
};

/// Amortized encoder: microstructure image (zero-padded to (n_pix+1)^2) -> mu.
class Encoder {
 public:
  nn::Conv2d conv1, conv2;
  nn::Deconv2d deconv1, deconv2;
  nn::ChannelNorm norm1, norm2, norm3;
  nn::Linear fc;

  Encoder() = default;
  explicit Encoder(const ModelConfig& cfg);
  void init(Rng& rng);

  struct Trace {
    nn::Tensor3 t0, c1pre, c1act, p1, c2pre, c2act, n2;
    std::vector<nn::Tensor3> pool_in;
    nn::Tensor3 pe, d1pre, d1act, n3, d2pre;
    nn::ChannelNorm::Cache nc1, nc2, nc3;
    Eigen::VectorXd flat;
  };
  Eigen::VectorXd forward(const std::vector<std::uint8_t>& x, Trace* tr = nullptr) const;
  void backward(const Trace& tr, const Eigen::VectorXd& dmu, Encoder& g) const;

 private:
  int n_pix_ = 0, extra_pools_ = 0;
};

struct ParamRef {
  std::string name;
  double* data;
  int rows, cols;
  bool theta;  // model parameter (vs variational)
};

/// The complete trainable state: theta = {flow, decoder, prop-net, sigma_y}
/// and xi = {encoder, sigma_e}. Positive scalars are log-parameterized.
struct GenModel {
  ModelConfig cfg;
  LogisticDecoder decoder;
  Flow flow;
  PropNet prop;
  Encoder encoder;
  Eigen::VectorXd log_sigma_e;  // 1-vector
  Eigen::VectorXd log_sigma_y;  // d_obs_labeled

  GenModel() = default;
  explicit GenModel(const ModelConfig& cfg_);
  void init(std::uint64_t seed);

  double sigma_e() const { return std::exp(log_sigma_e[0]); }
  Eigen::VectorXd sigma_y() const { return log_sigma_y.array().exp(); }

  std::vector<ParamRef> param_refs();
  std::vector<ParamRef> param_refs() const;
  std::size_t param_count() const;
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& theta);
  void zero_params();

  Microstructure sample_x(const Eigen::VectorXd& z, Rng& rng) const;
  Eigen::VectorXd reparam_sample(const Eigen::VectorXd& mu, const Eigen::VectorXd& eps) const {
    return mu + sigma_e() * eps;
  }

  void save_checkpoint(const std::filesystem::path& path) const;
  static GenModel load_checkpoint(const std::filesystem::path& path);
};

/// Architecture parameter counter (per component, for reports/ablation).
struct ParamBreakdown {
  std::size_t flow = 0, decoder = 0, prop = 0, encoder = 0, sigma = 0;
  std::size_t total() const { return flow + decoder + prop + encoder + sigma; }
};
ParamBreakdown count_params(const ModelConfig& cfg);

}  // namespace genpanis
