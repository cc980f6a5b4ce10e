#include "genpanis/flow.hpp"

#include <cmath>

namespace genpanis {

Flow::Flow(int d_z, int n_layers, int hidden) : d_z_(d_z) {
  layers_.resize(n_layers);
  const int half = (d_z + 1) / 2;
  for (int k = 0; k < n_layers; ++k) {
    auto& layer = layers_[k];
    layer.s_net = nn::Mlp(d_z, hidden, d_z);
    layer.t_net = nn::Mlp(d_z, hidden, d_z);
    layer.alpha = Eigen::VectorXd::Zero(d_z);
    layer.mask = Eigen::VectorXd::Zero(d_z);
    for (int i = 0; i < d_z; ++i) {
      const bool first_half = i < half;
      layer.mask[i] = (first_half == (k % 2 == 0)) ? 1.0 : 0.0;
    }
  }
}

void Flow::init(Rng& rng) {
  for (auto& layer : layers_) {
    layer.s_net.init_he(rng);
    layer.t_net.init_he(rng);
    // Zeroed translation output + small alpha give a near-identity start
    // while keeping nonzero gradients on the scale path.
    layer.t_net.l3.weight.setZero();
    layer.t_net.l3.bias.setZero();
    layer.alpha.setConstant(0.01);
  }
}

void Flow::assert_finite(const Eigen::VectorXd& v, const char* where) const {
  if (!v.allFinite()) throw error(std::string("Flow: non-finite intermediate in ") + where);
}

std::pair<Eigen::VectorXd, double> Flow::forward(const Eigen::VectorXd& zeta, Trace* tr) const {
  if (zeta.size() != d_z_) throw error("Flow::forward: dimension mismatch");
  Eigen::VectorXd z = zeta;
  double logdet = 0.0;
  if (tr) tr->steps.clear();
  for (const auto& layer : layers_) {
    StepTrace st;
    st.input = z;
    st.masked = layer.mask.cwiseProduct(z);
    st.s_raw = layer.s_net.forward(st.masked, tr ? &st.s_tr : nullptr);
    st.s = st.s_raw.array().tanh() * layer.alpha.array();
    st.t = layer.t_net.forward(st.masked, tr ? &st.t_tr : nullptr);
    const Eigen::ArrayXd um = 1.0 - layer.mask.array();
    z = st.masked.array() + um * (z.array() * st.s.array().exp() + st.t.array());
    logdet += (um * st.s.array()).sum();
    assert_finite(z, "forward");
    if (tr) tr->steps.push_back(std::move(st));
  }
  return {std::move(z), logdet};
}

std::pair<Eigen::VectorXd, double> Flow::inverse(const Eigen::VectorXd& z, Trace* tr) const {
  if (z.size() != d_z_) throw error("Flow::inverse: dimension mismatch");
  Eigen::VectorXd cur = z;
  double logdet = 0.0;
  if (tr) tr->steps.clear();
  for (int k = n_layers() - 1; k >= 0; --k) {
    const auto& layer = layers_[k];
    StepTrace st;
    st.input = cur;
    st.masked = layer.mask.cwiseProduct(cur);
    st.s_raw = layer.s_net.forward(st.masked, tr ? &st.s_tr : nullptr);
    st.s = st.s_raw.array().tanh() * layer.alpha.array();
    st.t = layer.t_net.forward(st.masked, tr ? &st.t_tr : nullptr);
    const Eigen::ArrayXd um = 1.0 - layer.mask.array();
    cur = st.masked.array() + um * (cur.array() - st.t.array()) * (-st.s.array()).exp();
    logdet -= (um * st.s.array()).sum();
    assert_finite(cur, "inverse");
    if (tr) tr->steps.push_back(std::move(st));
  }
  if (tr) tr->zeta = cur;
  return {std::move(cur), logdet};
}

Eigen::VectorXd Flow::inverse_backward(const Trace& tr, const Eigen::VectorXd& dzeta,
                                       double dlogdet, Flow& g) const {
  if (static_cast<int>(tr.steps.size()) != n_layers())
    throw error("Flow::inverse_backward: trace mismatch");
  Eigen::VectorXd d = dzeta;  // cotangent on the current step's output
  // Inverse executed layers K-1..0; walk them back in 0..K-1 order.
  for (int k = 0; k < n_layers(); ++k) {
    const auto& layer = layers_[k];
    const auto& st = tr.steps[static_cast<std::size_t>(n_layers() - 1 - k)];
    auto& gl = g.layers_[k];
    const Eigen::ArrayXd um = 1.0 - layer.mask.array();
    const Eigen::ArrayXd exp_neg_s = (-st.s.array()).exp();
    const Eigen::ArrayXd diff = st.input.array() - st.t.array();  // z - t

    const Eigen::ArrayXd dt = -um * exp_neg_s * d.array();
    const Eigen::ArrayXd ds = -um * diff * exp_neg_s * d.array() - dlogdet * um;
    const Eigen::ArrayXd tanh_sraw = st.s_raw.array().tanh();
    gl.alpha.array() += tanh_sraw * ds;
    const Eigen::VectorXd ds_raw = ((1.0 - tanh_sraw.square()) * layer.alpha.array() * ds).matrix();

    Eigen::VectorXd dmasked = layer.s_net.backward(st.s_tr, ds_raw, gl.s_net);
    dmasked += layer.t_net.backward(st.t_tr, dt.matrix(), gl.t_net);

    Eigen::VectorXd din =
        (layer.mask.array() * (d.array() + dmasked.array()) + um * exp_neg_s * d.array()).matrix();
    d = std::move(din);
  }
  return d;
}

Eigen::VectorXd Flow::forward_backward(const Trace& tr, const Eigen::VectorXd& dz, double dlogdet,
                                       Flow& g) const {
  if (static_cast<int>(tr.steps.size()) != n_layers())
    throw error("Flow::forward_backward: trace mismatch");
  Eigen::VectorXd d = dz;
  // Forward executed layers 0..K-1; walk them back in K-1..0 order.
  for (int k = n_layers() - 1; k >= 0; --k) {
    const auto& layer = layers_[k];
    const auto& st = tr.steps[static_cast<std::size_t>(k)];
    auto& gl = g.layers_[k];
    const Eigen::ArrayXd um = 1.0 - layer.mask.array();
    const Eigen::ArrayXd exp_s = st.s.array().exp();

    const Eigen::ArrayXd dt = um * d.array();
    const Eigen::ArrayXd ds = um * st.input.array() * exp_s * d.array() + dlogdet * um;
    const Eigen::ArrayXd tanh_sraw = st.s_raw.array().tanh();
    gl.alpha.array() += tanh_sraw * ds;
    const Eigen::VectorXd ds_raw = ((1.0 - tanh_sraw.square()) * layer.alpha.array() * ds).matrix();

    Eigen::VectorXd dmasked = layer.s_net.backward(st.s_tr, ds_raw, gl.s_net);
    dmasked += layer.t_net.backward(st.t_tr, dt.matrix(), gl.t_net);

    Eigen::VectorXd din =
        (layer.mask.array() * (d.array() + dmasked.array()) + um * exp_s * d.array()).matrix();
    d = std::move(din);
  }
  return d;
}

double Flow::prior_logpdf(const Eigen::VectorXd& z, Trace* tr) const {
  Trace local;
  Trace* t = tr ? tr : &local;
  const auto [zeta, logdet_inv] = inverse(z, t);
  const double log2pi = std::log(2.0 * M_PI);
  return -0.5 * d_z_ * log2pi - 0.5 * zeta.squaredNorm() + logdet_inv;
}

Eigen::VectorXd Flow::prior_logpdf_backward(const Trace& tr, double dvalue, Flow& g) const {
  const Eigen::VectorXd dzeta = -dvalue * tr.zeta;
  if (n_layers() == 0) return dzeta;  // standard-normal prior
  return inverse_backward(tr, dzeta, dvalue, g);
}

Eigen::VectorXd Flow::sample(Rng& rng) const {
  Eigen::VectorXd zeta(d_z_);
  for (int i = 0; i < d_z_; ++i) zeta[i] = rng.normal();
  return forward(zeta).first;
}

}  // namespace genpanis
