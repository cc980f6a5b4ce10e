#include "genpanis/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "genpanis/tnsr.hpp"

namespace genpanis {

using nn::Tensor3;

ModelConfig ModelConfig::paper() {
  ModelConfig c;
  c.n_pix = 128;
  c.d_z = 60;
  c.flow_layers = 12;
  c.flow_hidden = 128;
  c.coarse_div = 16;
  c.rbf_m = 32;
  c.weight_grid = 17;
  c.quad_grid = 129;
  c.prop_c1 = 16;
  c.prop_c2 = 48;
  c.prop_c3 = 16;
  c.enc_c1 = 8;
  c.enc_c2 = 24;
  c.enc_c3 = 8;
  c.d_obs_labeled = 128 * 128;
  return c;
}

int ModelConfig::extra_pools() const {
  int size = n_pix / 4, count = 0;
  while (size > coarse_div) {
    size /= 2;
    ++count;
  }
  return count;
}

void ModelConfig::validate() const {
  if (n_pix < 8 || n_pix % 4 != 0) throw error("ModelConfig: n_pix must be a multiple of 4, >= 8");
  if (d_z < 1) throw error("ModelConfig: d_z must be >= 1");
  if (coarse_div < 2) throw error("ModelConfig: coarse_div must be >= 2");
  int size = n_pix / 4;
  while (size > coarse_div) {
    if (size % 2 != 0) throw error("ModelConfig: conv geometry cannot reach coarse_div");
    size /= 2;
  }
  if (size != coarse_div)
    throw error("ModelConfig: n_pix/4 must reduce to coarse_div by halving (got " +
                std::to_string(n_pix) + " vs " + std::to_string(coarse_div) + ")");
  if (rbf_m < 2 || weight_grid < 2 || quad_grid < 2) throw error("ModelConfig: grids must be >= 2");
  if (flow_layers < 0 || flow_hidden < 1) throw error("ModelConfig: bad flow sizes");
}

void ModelConfig::to_config(Config& c, const std::string& p) const {
  c.set(p + "n_pix", std::to_string(n_pix));
  c.set(p + "d_z", std::to_string(d_z));
  c.set(p + "flow_layers", std::to_string(flow_layers));
  c.set(p + "flow_hidden", std::to_string(flow_hidden));
  c.set(p + "coarse_div", std::to_string(coarse_div));
  c.set(p + "rbf_m", std::to_string(rbf_m));
  c.set(p + "weight_grid", std::to_string(weight_grid));
  c.set(p + "quad_grid", std::to_string(quad_grid));
  c.set(p + "prop_c1", std::to_string(prop_c1));
  c.set(p + "prop_c2", std::to_string(prop_c2));
  c.set(p + "prop_c3", std::to_string(prop_c3));
  c.set(p + "enc_c1", std::to_string(enc_c1));
  c.set(p + "enc_c2", std::to_string(enc_c2));
  c.set(p + "enc_c3", std::to_string(enc_c3));
  c.set(p + "d_obs_labeled", std::to_string(d_obs_labeled));
}

ModelConfig ModelConfig::from_config(const Config& c, const std::string& p) {
  ModelConfig m;
  m.n_pix = c.get_int(p + "n_pix", m.n_pix);
  m.d_z = c.get_int(p + "d_z", m.d_z);
  m.flow_layers = c.get_int(p + "flow_layers", m.flow_layers);
  m.flow_hidden = c.get_int(p + "flow_hidden", m.flow_hidden);
  m.coarse_div = c.get_int(p + "coarse_div", m.coarse_div);
  m.rbf_m = c.get_int(p + "rbf_m", m.rbf_m);
  m.weight_grid = c.get_int(p + "weight_grid", m.weight_grid);
  m.quad_grid = c.get_int(p + "quad_grid", m.quad_grid);
  m.prop_c1 = c.get_int(p + "prop_c1", m.prop_c1);
  m.prop_c2 = c.get_int(p + "prop_c2", m.prop_c2);
  m.prop_c3 = c.get_int(p + "prop_c3", m.prop_c3);
  m.enc_c1 = c.get_int(p + "enc_c1", m.enc_c1);
  m.enc_c2 = c.get_int(p + "enc_c2", m.enc_c2);
  m.enc_c3 = c.get_int(p + "enc_c3", m.enc_c3);
  m.d_obs_labeled = c.get_int(p + "d_obs_labeled", m.d_obs_labeled);
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// LogisticDecoder

Eigen::VectorXd LogisticDecoder::logits(const Eigen::VectorXd& z) const {
  Eigen::VectorXd a = weight * z + bias;
  return a.cwiseMax(-kLogitClamp).cwiseMin(kLogitClamp);
}

Eigen::VectorXd LogisticDecoder::probs(const Eigen::VectorXd& z) const {
  return logits(z).unaryExpr([](double a) { return nn::sigmoid(a); });
}

double LogisticDecoder::loglik(const std::vector<std::uint8_t>& x, const Eigen::VectorXd& z) const {
  if (static_cast<int>(x.size()) != weight.rows()) throw error("decoder loglik: size mismatch");
  const Eigen::VectorXd a = logits(z);
  double ll = 0.0;
  for (int j = 0; j < a.size(); ++j)
    ll -= x[j] ? nn::softplus(-a[j]) : nn::softplus(a[j]);  // log sig / log(1-sig)
  return ll;
}

Eigen::VectorXd LogisticDecoder::loglik_backward(const std::vector<std::uint8_t>& x,
                                                 const Eigen::VectorXd& z, double dvalue,
                                                 LogisticDecoder& g) const {
  const Eigen::VectorXd a_raw = weight * z + bias;
  Eigen::VectorXd da(a_raw.size());
  for (int j = 0; j < a_raw.size(); ++j) {
    if (std::abs(a_raw[j]) >= kLogitClamp) {
      da[j] = 0.0;  // clamp region
    } else {
      da[j] = dvalue * (static_cast<double>(x[j]) - nn::sigmoid(a_raw[j]));
    }
  }
  g.weight.noalias() += da * z.transpose();
  g.bias += da;
  return weight.transpose() * da;
}

// ---------------------------------------------------------------------------
// PropNet

PropNet::PropNet(const ModelConfig& cfg)
    : fc(cfg.image_side() * cfg.image_side(), cfg.d_z),
      conv1(1, cfg.prop_c1, 3, 2, 1),
      conv2(cfg.prop_c1, cfg.prop_c2, 3, 1, 1),
      deconv1(cfg.prop_c2, cfg.prop_c3, 4, 1),
      deconv2(cfg.prop_c3, 1, 3, 1),
      norm1(cfg.prop_c1),
      norm2(cfg.prop_c2),
      norm3(cfg.prop_c3),
      n_pix_(cfg.n_pix),
      coarse_div_(cfg.coarse_div),
      extra_pools_(cfg.extra_pools()),
      elements_(TriMesh::regular(cfg.coarse_div).elements()) {}

void PropNet::init(Rng& rng) {
  fc.init_he(rng);
  conv1.init_he(rng);
  conv2.init_he(rng);
  deconv1.init_he(rng);
  deconv2.init_he(rng);
}

Eigen::VectorXd PropNet::forward(const Eigen::VectorXd& z, Trace* tr) const {
  const int s0 = n_pix_ + 1;
  Trace local;
  Trace& t = tr ? *tr : local;
  t.z = z;
  t.t0 = Tensor3(1, s0, s0);
  t.t0.data = fc.forward(z);
  t.c1pre = conv1.forward(t.t0);
  t.c1act = nn::softplus(t.c1pre);
  Tensor3 n1 = norm1.forward(t.c1act, t.nc1);
  t.p1 = nn::AvgPool2::forward(n1);
  t.c2pre = conv2.forward(t.p1);
  t.c2act = nn::softplus(t.c2pre);
  t.n2 = norm2.forward(t.c2act, t.nc2);
  t.pool_in.clear();
  Tensor3 pe = t.n2;
  for (int i = 0; i < extra_pools_; ++i) {
    t.pool_in.push_back(pe);
    pe = nn::AvgPool2::forward(pe);
  }
  t.pe = std::move(pe);
  t.d1pre = deconv1.forward(t.pe);
  t.d1act = nn::softplus(t.d1pre);
  t.n3 = norm3.forward(t.d1act, t.nc3);
  Tensor3 d2 = deconv2.forward(t.n3);  // 1 x (nc+1) x (nc+1), no activation
  t.nodal = d2.data;

  const int ne = static_cast<int>(elements_.rows());
  t.x_pre.resize(ne);
  for (int e = 0; e < ne; ++e)
    t.x_pre[e] =
        (t.nodal[elements_(e, 0)] + t.nodal[elements_(e, 1)] + t.nodal[elements_(e, 2)]) / 3.0;
  return t.x_pre.unaryExpr([](double v) { return nn::softplus(v); });
}

Eigen::VectorXd PropNet::backward(const Trace& t, const Eigen::VectorXd& dX, PropNet& g) const {
  const int ne = static_cast<int>(elements_.rows());
  Eigen::VectorXd dnodal = Eigen::VectorXd::Zero(t.nodal.size());
  for (int e = 0; e < ne; ++e) {
    const double d = dX[e] * nn::sigmoid(t.x_pre[e]) / 3.0;
    dnodal[elements_(e, 0)] += d;
    dnodal[elements_(e, 1)] += d;
    dnodal[elements_(e, 2)] += d;
  }
  Tensor3 dd2(1, coarse_div_ + 1, coarse_div_ + 1);
  dd2.data = dnodal;
  Tensor3 dn3 = deconv2.backward(t.n3, dd2, g.deconv2);
  Tensor3 dd1act = norm3.backward(t.nc3, dn3, g.norm3);
  Tensor3 dd1pre = nn::softplus_backward(t.d1pre, dd1act);
  Tensor3 dpe = deconv1.backward(t.pe, dd1pre, g.deconv1);
  for (int i = extra_pools_ - 1; i >= 0; --i)
    dpe = nn::AvgPool2::backward(t.pool_in[static_cast<std::size_t>(i)].h,
                                 t.pool_in[static_cast<std::size_t>(i)].w, dpe);
  Tensor3 dc2act = norm2.backward(t.nc2, dpe, g.norm2);
  Tensor3 dc2pre = nn::softplus_backward(t.c2pre, dc2act);
  Tensor3 dp1 = conv2.backward(t.p1, dc2pre, g.conv2);
  Tensor3 dn1 = nn::AvgPool2::backward(t.c1act.h, t.c1act.w, dp1);
  Tensor3 dc1act = norm1.backward(t.nc1, dn1, g.norm1);
  Tensor3 dc1pre = nn::softplus_backward(t.c1pre, dc1act);
  Tensor3 dt0 = conv1.backward(t.t0, dc1pre, g.conv1);
  return fc.backward(t.z, dt0.data, g.fc);
}

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(const ModelConfig& cfg)
    : conv1(1, cfg.enc_c1, 3, 2, 1),
      conv2(cfg.enc_c1, cfg.enc_c2, 3, 1, 1),
      deconv1(cfg.enc_c2, cfg.enc_c3, 4, 1),
      deconv2(cfg.enc_c3, 1, 3, 1),
      norm1(cfg.enc_c1),
      norm2(cfg.enc_c2),
      norm3(cfg.enc_c3),
      fc(cfg.d_z, cfg.nodal_side() * cfg.nodal_side()),
      n_pix_(cfg.n_pix),
      extra_pools_(cfg.extra_pools()) {}

void Encoder::init(Rng& rng) {
  conv1.init_he(rng);
  conv2.init_he(rng);
  deconv1.init_he(rng);
  deconv2.init_he(rng);
  fc.init_he(rng);
}

Eigen::VectorXd Encoder::forward(const std::vector<std::uint8_t>& x, Trace* tr) const {
  if (static_cast<int>(x.size()) != n_pix_ * n_pix_) throw error("Encoder: image size mismatch");
  const int s0 = n_pix_ + 1;
  Trace local;
  Trace& t = tr ? *tr : local;
  t.t0 = Tensor3(1, s0, s0);  // zero-padded by one trailing row/column
  for (int y = 0; y < n_pix_; ++y)
    for (int xx = 0; xx < n_pix_; ++xx) t.t0.at(0, y, xx) = static_cast<double>(x[y * n_pix_ + xx]);

  t.c1pre = conv1.forward(t.t0);
  t.c1act = nn::softplus(t.c1pre);
  Tensor3 n1 = norm1.forward(t.c1act, t.nc1);
  t.p1 = nn::AvgPool2::forward(n1);
  t.c2pre = conv2.forward(t.p1);
  t.c2act = nn::softplus(t.c2pre);
  t.n2 = norm2.forward(t.c2act, t.nc2);
  t.pool_in.clear();
  Tensor3 pe = t.n2;
  for (int i = 0; i < extra_pools_; ++i) {
    t.pool_in.push_back(pe);
    pe = nn::AvgPool2::forward(pe);
  }
  t.pe = std::move(pe);
  t.d1pre = deconv1.forward(t.pe);
  t.d1act = nn::softplus(t.d1pre);
  t.n3 = norm3.forward(t.d1act, t.nc3);
  t.d2pre = deconv2.forward(t.n3);
  t.flat = nn::softplus(t.d2pre).data;
  return fc.forward(t.flat);
}

void Encoder::backward(const Trace& t, const Eigen::VectorXd& dmu, Encoder& g) const {
  Eigen::VectorXd dflat = fc.backward(t.flat, dmu, g.fc);
  Tensor3 dd2act(t.d2pre.c, t.d2pre.h, t.d2pre.w);
  dd2act.data = dflat;
  Tensor3 dd2pre = nn::softplus_backward(t.d2pre, dd2act);
  Tensor3 dn3 = deconv2.backward(t.n3, dd2pre, g.deconv2);
  Tensor3 dd1act = norm3.backward(t.nc3, dn3, g.norm3);
  Tensor3 dd1pre = nn::softplus_backward(t.d1pre, dd1act);
  Tensor3 dpe = deconv1.backward(t.pe, dd1pre, g.deconv1);
  for (int i = extra_pools_ - 1; i >= 0; --i)
    dpe = nn::AvgPool2::backward(t.pool_in[static_cast<std::size_t>(i)].h,
                                 t.pool_in[static_cast<std::size_t>(i)].w, dpe);
  Tensor3 dc2act = norm2.backward(t.nc2, dpe, g.norm2);
  Tensor3 dc2pre = nn::softplus_backward(t.c2pre, dc2act);
  Tensor3 dp1 = conv2.backward(t.p1, dc2pre, g.conv2);
  Tensor3 dn1 = nn::AvgPool2::backward(t.c1act.h, t.c1act.w, dp1);
  Tensor3 dc1act = norm1.backward(t.nc1, dn1, g.norm1);
  Tensor3 dc1pre = nn::softplus_backward(t.c1pre, dc1act);
  conv1.backward(t.t0, dc1pre, g.conv1);  // input gradient unused (data)
}

// ---------------------------------------------------------------------------
// GenModel

GenModel::GenModel(const ModelConfig& cfg_)
    : cfg(cfg_),
      decoder(cfg_.d_x(), cfg_.d_z),
      flow(cfg_.d_z, cfg_.flow_layers, cfg_.flow_hidden),
      prop(cfg_),
      encoder(cfg_),
      log_sigma_e(Eigen::VectorXd::Zero(1)),
      log_sigma_y(Eigen::VectorXd::Zero(cfg_.d_obs_labeled)) {
  cfg.validate();
}

void GenModel::init(std::uint64_t seed) {
  Rng rng(seed);
  for (int r = 0; r < decoder.weight.rows(); ++r) {
    for (int c = 0; c < decoder.weight.cols(); ++c) decoder.weight(r, c) = 0.01 * rng.normal();
    decoder.bias[r] = 0.01 * rng.normal();
  }
  flow.init(rng);
  prop.init(rng);
  encoder.init(rng);
  log_sigma_e.setConstant(std::log(0.2));
  log_sigma_y.setZero();  // sigma_y starts at 1
}

std::vector<ParamRef> GenModel::param_refs() {
  std::vector<ParamRef> refs;
  auto add = [&](const std::string& name, Eigen::MatrixXd& m, bool theta) {
    refs.push_back({name, m.data(), static_cast<int>(m.rows()), static_cast<int>(m.cols()), theta});
  };
  auto addv = [&](const std::string& name, Eigen::VectorXd& v, bool theta) {
    refs.push_back({name, v.data(), static_cast<int>(v.size()), 1, theta});
  };
  add("decoder.W", decoder.weight, true);
  addv("decoder.b", decoder.bias, true);
  for (int k = 0; k < flow.n_layers(); ++k) {
    auto& layer = flow.layers()[static_cast<std::size_t>(k)];
    const std::string p = "flow." + std::to_string(k) + ".";
    for (auto [tag, net] : {std::pair<const char*, nn::Mlp*>{"s", &layer.s_net},
                            std::pair<const char*, nn::Mlp*>{"t", &layer.t_net}}) {
      add(p + tag + ".l1.W", net->l1.weight, true);
      addv(p + tag + ".l1.b", net->l1.bias, true);
      add(p + tag + ".l2.W", net->l2.weight, true);
      addv(p + tag + ".l2.b", net->l2.bias, true);
      add(p + tag + ".l3.W", net->l3.weight, true);
      addv(p + tag + ".l3.b", net->l3.bias, true);
    }
    addv(p + "alpha", layer.alpha, true);
  }
  auto add_conv = [&](const std::string& p, nn::Conv2d& c) {
    add(p + ".W", c.weight, true);
    addv(p + ".b", c.bias, true);
  };
  auto add_deconv = [&](const std::string& p, nn::Deconv2d& c) {
    add(p + ".W", c.weight, true);
    addv(p + ".b", c.bias, true);
  };
  auto add_norm = [&](const std::string& p, nn::ChannelNorm& n) {
    addv(p + ".gamma", n.gamma, true);
    addv(p + ".beta", n.beta, true);
  };
  add("prop.fc.W", prop.fc.weight, true);
  addv("prop.fc.b", prop.fc.bias, true);
  add_conv("prop.conv1", prop.conv1);
  add_norm("prop.norm1", prop.norm1);
  add_conv("prop.conv2", prop.conv2);
  add_norm("prop.norm2", prop.norm2);
  add_deconv("prop.deconv1", prop.deconv1);
  add_norm("prop.norm3", prop.norm3);
  add_deconv("prop.deconv2", prop.deconv2);
  addv("sigma.log_sigma_y", log_sigma_y, true);

  // Variational parameters (xi): mark theta=false and fix names afterwards.
  const std::size_t xi_start = refs.size();
  add("encoder.conv1.W", encoder.conv1.weight, false);
  addv("encoder.conv1.b", encoder.conv1.bias, false);
  addv("encoder.norm1.gamma", encoder.norm1.gamma, false);
  addv("encoder.norm1.beta", encoder.norm1.beta, false);
  add("encoder.conv2.W", encoder.conv2.weight, false);
  addv("encoder.conv2.b", encoder.conv2.bias, false);
  addv("encoder.norm2.gamma", encoder.norm2.gamma, false);
  addv("encoder.norm2.beta", encoder.norm2.beta, false);
  add("encoder.deconv1.W", encoder.deconv1.weight, false);
  addv("encoder.deconv1.b", encoder.deconv1.bias, false);
  addv("encoder.norm3.gamma", encoder.norm3.gamma, false);
  addv("encoder.norm3.beta", encoder.norm3.beta, false);
  add("encoder.deconv2.W", encoder.deconv2.weight, false);
  addv("encoder.deconv2.b", encoder.deconv2.bias, false);
  add("encoder.fc.W", encoder.fc.weight, false);
  addv("encoder.fc.b", encoder.fc.bias, false);
  addv("sigma.log_sigma_e", log_sigma_e, false);
  for (std::size_t i = xi_start; i < refs.size(); ++i) refs[i].theta = false;
  return refs;
}

std::vector<ParamRef> GenModel::param_refs() const {
  return const_cast<GenModel*>(this)->param_refs();
}

std::size_t GenModel::param_count() const {
  std::size_t n = 0;
  for (const auto& r : param_refs()) n += static_cast<std::size_t>(r.rows) * r.cols;
  return n;
}

Eigen::VectorXd GenModel::flatten() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(param_count()));
  Eigen::Index at = 0;
  for (const auto& r : param_refs()) {
    const Eigen::Index n = static_cast<Eigen::Index>(r.rows) * r.cols;
    std::memcpy(out.data() + at, r.data, static_cast<std::size_t>(n) * sizeof(double));
    at += n;
  }
  return out;
}

void GenModel::assign(const Eigen::VectorXd& theta) {
  if (theta.size() != static_cast<Eigen::Index>(param_count()))
    throw error("GenModel::assign: size mismatch");
  Eigen::Index at = 0;
  for (auto& r : param_refs()) {
    const Eigen::Index n = static_cast<Eigen::Index>(r.rows) * r.cols;
    std::memcpy(r.data, theta.data() + at, static_cast<std::size_t>(n) * sizeof(double));
    at += n;
  }
}

void GenModel::zero_params() {
  for (auto& r : param_refs())
    std::memset(r.data, 0, static_cast<std::size_t>(r.rows) * r.cols * sizeof(double));
}

Microstructure GenModel::sample_x(const Eigen::VectorXd& z, Rng& rng) const {
  const Eigen::VectorXd p = decoder.probs(z);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(p.size()));
  for (int j = 0; j < p.size(); ++j) bits[static_cast<std::size_t>(j)] = rng.uniform() < p[j] ? 1 : 0;
  return Microstructure(GridSpec(cfg.n_pix), std::move(bits));
}

void GenModel::save_checkpoint(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open checkpoint for writing: " + path.string());
  Config c;
  cfg.to_config(c, "");
  const auto refs = param_refs();

  out << "GPCKPT 1\n";
  std::ostringstream cfg_text;
  for (const auto& [k, v] : c.entries()) cfg_text << k << " = " << v << "\n";
  out << "config " << c.entries().size() << "\n" << cfg_text.str();
  out << "tensors " << refs.size() << "\n";
  // Offsets are relative to the first byte after the END line.
  std::size_t offset = 0;
  for (const auto& r : refs) {
    out << r.name << " " << r.rows << "x" << r.cols << " " << offset << "\n";
    const std::size_t n = static_cast<std::size_t>(r.rows) * r.cols;
    // header bytes + payload
    std::ostringstream hdr;
    tnsr::write_f64(hdr, {static_cast<std::size_t>(r.rows), static_cast<std::size_t>(r.cols)},
                    r.data);
    offset += hdr.str().size();
  }
  out << "END\n";
  for (const auto& r : refs)
    tnsr::write_f64(out, {static_cast<std::size_t>(r.rows), static_cast<std::size_t>(r.cols)},
                    r.data);
}

GenModel GenModel::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open checkpoint: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "GPCKPT 1")
    throw error("checkpoint: bad magic in " + path.string());

  if (!std::getline(in, line) || line.rfind("config ", 0) != 0)
    throw error("checkpoint: missing config section");
  const int n_cfg = std::stoi(line.substr(7));
  Config c;
  for (int i = 0; i < n_cfg; ++i) {
    if (!std::getline(in, line)) throw error("checkpoint: truncated config");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw error("checkpoint: malformed config line");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(' ');
      const auto e = s.find_last_not_of(' ');
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  GenModel model(ModelConfig::from_config(c, ""));

  if (!std::getline(in, line) || line.rfind("tensors ", 0) != 0)
    throw error("checkpoint: missing tensor manifest");
  const std::size_t n_tensors = std::stoull(line.substr(8));
  struct Entry {
    std::string name;
    int rows, cols;
  };
  std::vector<Entry> manifest;
  for (std::size_t i = 0; i < n_tensors; ++i) {
    if (!std::getline(in, line)) throw error("checkpoint: truncated manifest");
    std::istringstream ls(line);
    std::string name, shape, off;
    ls >> name >> shape >> off;
    const auto xpos = shape.find('x');
    manifest.push_back({name, std::stoi(shape.substr(0, xpos)), std::stoi(shape.substr(xpos + 1))});
  }
  if (!std::getline(in, line) || line != "END") throw error("checkpoint: missing END marker");

  auto refs = model.param_refs();
  if (refs.size() != manifest.size())
    throw error("checkpoint: tensor count mismatch (checkpoint " + std::to_string(manifest.size()) +
                " vs architecture " + std::to_string(refs.size()) + ")");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& m = manifest[i];
    auto& r = refs[i];
    if (m.name != r.name || m.rows != r.rows || m.cols != r.cols)
      throw error("checkpoint: tensor mismatch at '" + m.name + "' (" + std::to_string(m.rows) +
                  "x" + std::to_string(m.cols) + ") vs architecture '" + r.name + "' (" +
                  std::to_string(r.rows) + "x" + std::to_string(r.cols) + ")");
    const tnsr::Tensor t = tnsr::read(in);
    if (t.dtype != "f64" || t.count() != static_cast<std::size_t>(r.rows) * r.cols)
      throw error("checkpoint: bad tensor payload for '" + m.name + "'");
    std::memcpy(r.data, t.f64.data(), t.f64.size() * sizeof(double));
  }
  return model;
}

ParamBreakdown count_params(const ModelConfig& cfg) {
  GenModel tmp(cfg);
  ParamBreakdown out;
  for (const auto& r : tmp.param_refs()) {
    const std::size_t n = static_cast<std::size_t>(r.rows) * r.cols;
    if (r.name.rfind("flow.", 0) == 0)
      out.flow += n;
    else if (r.name.rfind("decoder.", 0) == 0)
      out.decoder += n;
    else if (r.name.rfind("prop.", 0) == 0)
      out.prop += n;
    else if (r.name.rfind("encoder.", 0) == 0)
      out.encoder += n;
    else
      out.sigma += n;
  }
  return out;
}

}  // namespace genpanis
