#include "genpanis/inference.hpp"

#include <cmath>

namespace genpanis {

namespace {

/// Scratch gradient sinks for paths where only the z-gradient is consumed.
struct Scratch {
  PropNet prop;
  Flow flow;
  LogisticDecoder decoder;
  explicit Scratch(const ModelConfig& cfg)
      : prop(cfg), flow(cfg.d_z, cfg.flow_layers, cfg.flow_hidden), decoder(cfg.d_x(), cfg.d_z) {}
};

}  // namespace

std::pair<double, Eigen::VectorXd> Predictor::inverse_logpost(const Eigen::VectorXd& z,
                                                              const Eigen::VectorXd& u_hat,
                                                              const Eigen::MatrixXd& obs_matrix,
                                                              double sigma_n,
                                                              const PdeProblem& problem) const {
  if (sigma_n <= 0) throw error("inverse_logpost: sigma_n must be positive");
  thread_local std::unique_ptr<Scratch> scratch;
  thread_local const GenModel* scratch_for = nullptr;
  if (!scratch || scratch_for != &model_) {
    scratch = std::make_unique<Scratch>(model_.cfg);
    scratch_for = &model_;
  }

  PropNet::Trace prop_tr;
  const Eigen::VectorXd X = model_.prop.forward(z, &prop_tr);
  const CoarseModel::Solution sol = phys_.coarse.solve(X, problem);
  const Eigen::VectorXd pred = obs_matrix * sol.y_coeff;
  const Eigen::VectorXd diff = u_hat - pred;
  const double s2 = sigma_n * sigma_n;
  const double misfit = -0.5 * static_cast<double>(diff.size()) * std::log(2.0 * M_PI * s2) -
                        0.5 * diff.squaredNorm() / s2;

  Flow::Trace flow_tr;
  const double prior = model_.flow.prior_logpdf(z, &flow_tr);

  const Eigen::VectorXd ybar = obs_matrix.transpose() * (diff / s2);
  const Eigen::VectorXd Xbar = phys_.coarse.vjp(sol, ybar);
  Eigen::VectorXd zbar = model_.prop.backward(prop_tr, Xbar, scratch->prop);
  zbar += model_.flow.prior_logpdf_backward(flow_tr, 1.0, scratch->flow);
  return {misfit + prior, std::move(zbar)};
}

InverseResult Predictor::solve_inverse(const Eigen::VectorXd& u_hat,
                                       const Eigen::MatrixX2d& obs_locations, double sigma_n,
                                       const PdeProblem& problem, const HmcConfig& hmc,
                                       int workers) const {
  if (u_hat.size() != obs_locations.rows())
    throw error("solve_inverse: observations do not match locations");
  const Eigen::MatrixXd obs_matrix = phys_.basis.eval_matrix(obs_locations);

  const int chains = std::max(1, hmc.chains);
  const int keep_per_chain = (hmc.n_samples + chains - 1) / chains;

  std::vector<HmcChainResult> chain_results(static_cast<std::size_t>(chains));
  std::vector<std::string> chain_errors(static_cast<std::size_t>(chains));
  parallel_for(static_cast<std::size_t>(chains), workers, [&](std::size_t c) {
    try {
      Rng rng(Rng::derive(hmc.seed, 0xc0de + c));
      const Eigen::VectorXd z0 = model_.flow.sample(rng);  // from the trained prior
      const LogDensity target = [&](const Eigen::VectorXd& z) {
        return inverse_logpost(z, u_hat, obs_matrix, sigma_n, problem);
      };
      chain_results[c] = hmc_chain(target, z0, keep_per_chain, hmc, rng);
    } catch (const std::exception& e) {
      chain_errors[c] = e.what();
    }
  });
  for (const auto& err : chain_errors)
    if (!err.empty()) throw error("solve_inverse: chain failed: " + err);

  InverseResult out;
  const int d_x = model_.cfg.d_x();
  const int total = keep_per_chain * chains;
  out.z_samples.resize(total, model_.cfg.d_z);
  out.x_samples.reserve(static_cast<std::size_t>(total));
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d_x);
  double acc = 0.0;
  int row = 0;
  for (int c = 0; c < chains; ++c) {
    Rng xrng(Rng::derive(hmc.seed, 0xdec0de + static_cast<std::uint64_t>(c)));
    const auto& cr = chain_results[static_cast<std::size_t>(c)];
    acc += cr.acceptance / chains;
    for (int s = 0; s < cr.samples.rows(); ++s) {
      out.z_samples.row(row++) = cr.samples.row(s);
      out.x_samples.push_back(model_.sample_x(cr.samples.row(s).transpose(), xrng));
      for (int j = 0; j < d_x; ++j) mean[j] += out.x_samples.back().values[static_cast<std::size_t>(j)];
    }
  }
  mean /= static_cast<double>(total);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d_x);
  for (const auto& xs : out.x_samples)
    for (int j = 0; j < d_x; ++j) {
      const double d = xs.values[static_cast<std::size_t>(j)] - mean[j];
      var[j] += d * d;
    }
  var /= static_cast<double>(total);
  out.x_mean = std::move(mean);
  out.x_var = std::move(var);
  out.acceptance = acc;
  return out;
}

ForwardResult Predictor::solve_forward(const Microstructure& x_hat, const PdeProblem& problem,
                                       const Eigen::MatrixX2d& locations, int n_samples,
                                       std::uint64_t seed, bool use_hmc,
                                       const HmcConfig* hmc) const {
  if (n_samples < 1) throw error("solve_forward: need at least one sample");
  const Eigen::MatrixXd obs_matrix = phys_.basis.eval_matrix(locations);

  Eigen::MatrixXd zs(n_samples, model_.cfg.d_z);
  if (!use_hmc) {
    // Encoder route: z ~ N(g(x_hat), sigma_e^2 I).
    const Eigen::VectorXd mu = model_.encoder.forward(x_hat.values);
    const double sigma_e = model_.sigma_e();
    Rng rng(seed);
    for (int l = 0; l < n_samples; ++l)
      for (int i = 0; i < model_.cfg.d_z; ++i) zs(l, i) = mu[i] + sigma_e * rng.normal();
  } else {
    HmcConfig cfg = hmc ? *hmc : HmcConfig{};
    cfg.n_samples = n_samples;
    cfg.chains = 1;
    cfg.seed = seed;
    Rng rng(Rng::derive(seed, 0xf0));
    thread_local std::unique_ptr<Scratch> scratch;
    scratch = std::make_unique<Scratch>(model_.cfg);
    const LogDensity target = [&](const Eigen::VectorXd& z) {
      Flow::Trace flow_tr;
      const double lp =
          model_.decoder.loglik(x_hat.values, z) + model_.flow.prior_logpdf(z, &flow_tr);
      Eigen::VectorXd g = model_.decoder.loglik_backward(x_hat.values, z, 1.0, scratch->decoder);
      g += model_.flow.prior_logpdf_backward(flow_tr, 1.0, scratch->flow);
      return std::make_pair(lp, std::move(g));
    };
    const Eigen::VectorXd z0 = model_.flow.sample(rng);
    zs = hmc_chain(target, z0, n_samples, cfg, rng).samples;
  }

  ForwardResult out;
  out.samples.resize(n_samples, locations.rows());
  for (int l = 0; l < n_samples; ++l)
    out.samples.row(l) = predict_u(zs.row(l).transpose(), problem, obs_matrix);
  out.mean = out.samples.colwise().mean().transpose();
  Eigen::VectorXd var = Eigen::VectorXd::Zero(locations.rows());
  for (int l = 0; l < n_samples; ++l)
    var += (out.samples.row(l).transpose() - out.mean).array().square().matrix();
  out.stddev = (var / std::max(1, n_samples - 1)).cwiseSqrt();
  return out;
}

Eigen::VectorXd Predictor::predict_u(const Eigen::VectorXd& z, const PdeProblem& problem,
                                     const Eigen::MatrixXd& obs_matrix) const {
  const Eigen::VectorXd X = model_.prop.forward(z);
  const CoarseModel::Solution sol = phys_.coarse.solve(X, problem);
  return obs_matrix * sol.y_coeff;
}

double relative_l2(const Eigen::VectorXd& u_ref, const Eigen::VectorXd& u_pred) {
  if (u_ref.size() != u_pred.size()) throw error("relative_l2: size mismatch");
  const double denom = u_ref.norm();
  if (denom == 0) throw error("relative_l2: reference has zero norm");
  return (u_ref - u_pred).norm() / denom;
}

double pixel_accuracy(const Eigen::VectorXd& x_mean, const Microstructure& truth) {
  if (x_mean.size() != static_cast<Eigen::Index>(truth.values.size()))
    throw error("pixel_accuracy: size mismatch");
  int match = 0;
  for (int j = 0; j < x_mean.size(); ++j) {
    const int cls = x_mean[j] > 0.5 ? 1 : 0;  // strict: exactly 0.5 -> class 0
    match += (cls == truth.values[static_cast<std::size_t>(j)]) ? 1 : 0;
  }
  return static_cast<double>(match) / static_cast<double>(x_mean.size());
}

}  // namespace genpanis
