#include "genpanis/hmc.hpp"

#include <cmath>

namespace genpanis {

namespace {

struct Phase {
  Eigen::VectorXd q, p;
  double logp;  // log target at q
};

/// Leapfrog integration of H(q,p) = -logp(q) + |p|^2/2.
Phase leapfrog(const LogDensity& target, Phase state, double h, int n_steps) {
  if (n_steps == 0) return state;
  auto [lp, grad] = target(state.q);
  state.p += 0.5 * h * grad;
  for (int s = 0; s < n_steps; ++s) {
    state.q += h * state.p;
    std::tie(lp, grad) = target(state.q);
    state.p += (s + 1 == n_steps ? 0.5 : 1.0) * h * grad;
  }
  state.logp = lp;
  return state;
}

}  // namespace

double leapfrog_energy_error(const LogDensity& target, const Eigen::VectorXd& q0,
                             const Eigen::VectorXd& p0, double step_size, int n_steps) {
  Phase start{q0, p0, target(q0).first};
  const double h0 = -start.logp + 0.5 * p0.squaredNorm();
  const Phase end = leapfrog(target, start, step_size, n_steps);
  const double h1 = -end.logp + 0.5 * end.p.squaredNorm();
  return std::abs(h1 - h0);
}

HmcChainResult hmc_chain(const LogDensity& target, const Eigen::VectorXd& init, int n_keep,
                         const HmcConfig& cfg, Rng& rng) {
  cfg.validate();
  const Eigen::Index d = init.size();
  Phase cur{init, Eigen::VectorXd::Zero(d), target(init).first};
  if (!std::isfinite(cur.logp)) throw error("hmc: initial point has non-finite log density");

  double h = cfg.step_size;
  int window_accept = 0, window_total = 0;
  int kept_accept = 0, kept_total = 0;

  HmcChainResult out;
  out.samples.resize(n_keep, d);
  int kept = 0;

  const int total_iters = cfg.burnin + n_keep;
  for (int it = 0; it < total_iters; ++it) {
    for (Eigen::Index i = 0; i < d; ++i) cur.p[i] = rng.normal();
    const double h_cur = -cur.logp + 0.5 * cur.p.squaredNorm();

    const Phase prop = leapfrog(target, cur, h, cfg.leapfrog);
    const double h_prop = -prop.logp + 0.5 * prop.p.squaredNorm();

    const bool accept = std::isfinite(h_prop) && std::log(rng.uniform() + 1e-300) < h_cur - h_prop;
    if (accept) cur = prop;

    const bool in_burnin = it < cfg.burnin;
    if (in_burnin && cfg.adapt) {
      window_accept += accept ? 1 : 0;
      if (++window_total == 50) {
        const double rate = window_accept / 50.0;
        if (rate < cfg.target_lo) h *= 0.7;
        if (rate > cfg.target_hi) h *= 1.3;
        window_accept = window_total = 0;
      }
    }
    if (!in_burnin) {
      kept_accept += accept ? 1 : 0;
      ++kept_total;
      out.samples.row(kept++) = cur.q;
    }
  }
  out.acceptance = kept_total > 0 ? static_cast<double>(kept_accept) / kept_total : 0.0;
  out.step_size = h;
  if (cfg.leapfrog > 0 && kept_total >= 100 && out.acceptance < 0.01)
    throw error("hmc: acceptance below 1% -- step size error (h = " + format_double(h) + ")");
  return out;
}

}  // namespace genpanis
