#include "genpanis/train.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include "genpanis/fem.hpp"

namespace genpanis {

void TrainConfig::validate() const {
  if (lr <= 0) throw error("TrainConfig: lr must be positive");
  if (epochs < 1) throw error("TrainConfig: epochs must be >= 1");
  if (batch_u < 1 || batch_v < 1 || batch_l < 1)
    throw error("TrainConfig: batch sizes must be >= 1");
  if (mc_train < 1 || mc_trace < 1) throw error("TrainConfig: MC sample counts must be >= 1");
  if (lambda <= 0) throw error("TrainConfig: lambda must be positive");
}

MixedDataset make_mixed(const Dataset& ds, int n_l, int n_u, int n_v, const ObsSpec& obs,
                        double snr, std::uint64_t seed) {
  if (n_l < 0 || n_u < 0 || n_v < 0) throw error("make_mixed: negative counts");
  if (static_cast<std::size_t>(n_l + n_u + n_v) > ds.size())
    throw error("make_mixed: dataset has only " + std::to_string(ds.size()) + " samples, need " +
                std::to_string(n_l + n_u + n_v));
  if (n_l > 0 && !ds.has_solutions())
    throw error("make_mixed: labeled data requested but dataset has no solutions");

  MixedDataset out;
  out.obs_locations = obs.locations();

  const TriMesh mesh = TriMesh::regular(ds.meta.n_pix);
  for (int i = 0; i < n_l; ++i) {
    out.labeled_x.push_back(ds.microstructures[static_cast<std::size_t>(i)]);
    NodalSolution sol{&mesh, ds.solutions.row(i)};
    Eigen::VectorXd u = observe(sol, out.obs_locations);
    if (snr > 0) u = add_noise(u, snr, Rng::derive(seed, static_cast<std::uint64_t>(i))).first;
    if (i == 0) out.labeled_u.resize(n_l, u.size());
    out.labeled_u.row(i) = u;
  }
  for (int i = 0; i < n_u; ++i)
    out.unlabeled.push_back(ds.microstructures[static_cast<std::size_t>(n_l + i)]);
  for (int i = 0; i < n_v; ++i)
    out.virtual_x.push_back(ds.microstructures[static_cast<std::size_t>(n_l + n_u + i)]);
  return out;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad_ascent, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (params.size() != grad_ascent.size() || params.size() != state.m.size())
    throw error("adam_step: size mismatch");
  state.t += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * grad_ascent;
  state.v = beta2 * state.v.array() + (1.0 - beta2) * grad_ascent.array().square();
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  params.array() += lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + eps);
}

namespace {

struct Slot {
  DataKind kind;
  const Microstructure* x;
  const Eigen::VectorXd* u;
  std::uint64_t rng_seed;
  double weight;  // N_type / batch
};

struct SlotResult {
  double value = 0.0;  // integrand averaged over MC draws
  bool failed = false;
};

/// Evaluate slots; gradient mirrors are per contiguous chunk and summed by the
/// caller in chunk order, so results are deterministic for a fixed worker count.
void eval_slots(const ElboEvaluator& ev, const ModelConfig& cfg, const std::vector<Slot>& slots,
                int mc_samples, std::vector<GenModel>* chunk_grads, int workers,
                std::vector<SlotResult>& results) {
  results.assign(slots.size(), {});
  if (slots.empty()) return;
  const int n_chunks = chunk_grads ? static_cast<int>(chunk_grads->size()) : workers;
  const std::size_t chunk = (slots.size() + n_chunks - 1) / n_chunks;

  parallel_for(static_cast<std::size_t>(n_chunks), workers, [&](std::size_t ci) {
    const std::size_t lo = ci * chunk, hi = std::min(slots.size(), lo + chunk);
    GenModel* g = chunk_grads ? &(*chunk_grads)[ci] : nullptr;
    for (std::size_t s = lo; s < hi; ++s) {
      const Slot& slot = slots[s];
      Rng rng(slot.rng_seed);
      Eigen::VectorXd eps(cfg.d_z);
      double acc = 0.0;
      bool ok = true;
      for (int mc = 0; mc < mc_samples; ++mc) {
        for (int i = 0; i < cfg.d_z; ++i) eps[i] = rng.normal();
        try {
          acc += ev.eval(slot.kind, *slot.x, slot.u, eps, g, slot.weight / mc_samples);
        } catch (const error& e) {
          std::cerr << "warning: skipping sample (" << e.what() << ")\n";
          ok = false;
          break;
        }
      }
      results[s].value = ok ? acc / mc_samples : 0.0;
      results[s].failed = !ok;
    }
  });
}

}  // namespace

EpochRow evaluate_elbo(const GenModel& model, const PhysicsContext& phys, const MixedDataset& data,
                       int mc_samples, std::uint64_t seed, int workers, std::size_t max_per_type) {
  Eigen::MatrixXd obs_basis;
  if (data.n_l() > 0) obs_basis = phys.basis.eval_matrix(data.obs_locations);
  const ElboEvaluator ev(model, phys, data.n_l() > 0 ? &obs_basis : nullptr);

  EpochRow row;
  std::vector<Slot> slots;
  std::vector<Eigen::VectorXd> u_rows(data.n_l());
  auto add_type = [&](DataKind kind, std::size_t n_total) {
    const std::size_t n = std::min(n_total, max_per_type);
    for (std::size_t i = 0; i < n; ++i) {
      Slot s;
      s.kind = kind;
      s.weight = static_cast<double>(n_total) / static_cast<double>(n);
      s.rng_seed = Rng::derive(seed, 7777 + i * 3 + static_cast<std::size_t>(kind));
      if (kind == DataKind::Unlabeled) {
        s.x = &data.unlabeled[i];
        s.u = nullptr;
      } else if (kind == DataKind::Virtual) {
        s.x = &data.virtual_x[i];
        s.u = nullptr;
      } else {
        s.x = &data.labeled_x[i];
        u_rows[i] = data.labeled_u.row(static_cast<Eigen::Index>(i));
        s.u = &u_rows[i];
      }
      slots.push_back(s);
    }
  };
  if (data.n_u() > 0) add_type(DataKind::Unlabeled, data.n_u());
  if (data.n_v() > 0) add_type(DataKind::Virtual, data.n_v());
  if (data.n_l() > 0) add_type(DataKind::Labeled, data.n_l());

  std::vector<SlotResult> results;
  eval_slots(ev, model.cfg, slots, mc_samples, nullptr, workers, results);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const double v = results[s].value * slots[s].weight;
    switch (slots[s].kind) {
      case DataKind::Unlabeled: row.f_u += v; break;
      case DataKind::Virtual: row.f_v += v; break;
      case DataKind::Labeled: row.f_l += v; break;
    }
  }
  row.total = row.f_u + row.f_v + row.f_l;
  row.elbo16 = row.total;
  return row;
}

TrainResult train(GenModel& model, const PhysicsContext& phys, const MixedDataset& data,
                  const TrainConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  if (data.empty()) throw error("train: dataset is empty");
  const int workers = cfg.deterministic ? 1 : std::max(1, cfg.workers);

  Eigen::MatrixXd obs_basis;
  if (data.n_l() > 0) {
    obs_basis = phys.basis.eval_matrix(data.obs_locations);
    if (model.log_sigma_y.size() != obs_basis.rows())
      throw error("train: model sigma_y dimension (" + std::to_string(model.log_sigma_y.size()) +
                  ") does not match observation count (" + std::to_string(obs_basis.rows()) + ")");
  }
  const ElboEvaluator ev(model, phys, data.n_l() > 0 ? &obs_basis : nullptr);

  Eigen::VectorXd params = model.flatten();
  AdamState adam(params.size());

  // The vague Gaussian prior on theta enters as (tiny) weight decay.
  Eigen::VectorXd theta_mask(params.size());
  {
    Eigen::Index at = 0;
    for (const auto& r : model.param_refs()) {
      const Eigen::Index n = static_cast<Eigen::Index>(r.rows) * r.cols;
      theta_mask.segment(at, n).setConstant(r.theta ? 1.0 : 0.0);
      at += n;
    }
  }

  std::vector<GenModel> chunk_grads;
  for (int i = 0; i < workers; ++i) chunk_grads.emplace_back(model.cfg);

  const int steps_u =
      data.n_u() ? static_cast<int>((data.n_u() + cfg.batch_u - 1) / cfg.batch_u) : 0;
  const int steps_v =
      data.n_v() ? static_cast<int>((data.n_v() + cfg.batch_v - 1) / cfg.batch_v) : 0;
  const int steps_l =
      data.n_l() ? static_cast<int>((data.n_l() + cfg.batch_l - 1) / cfg.batch_l) : 0;
  const int steps_per_epoch = std::max({steps_u, steps_v, steps_l, 1});
  const long total_steps = static_cast<long>(steps_per_epoch) * cfg.epochs;

  std::vector<Eigen::VectorXd> u_rows(data.n_l());
  for (std::size_t i = 0; i < data.n_l(); ++i)
    u_rows[i] = data.labeled_u.row(static_cast<Eigen::Index>(i));

  TrainResult result;
  if (!out_dir.empty()) ensure_dir(out_dir);
  std::ofstream trace_csv;
  if (!out_dir.empty()) {
    trace_csv.open(out_dir / "elbo_trace.csv");
    trace_csv << "epoch,F_u,F_v,F_l,total,elbo16\n";
  }

  double peak_smoothed = -std::numeric_limits<double>::infinity();
  std::vector<double> totals;
  long step_counter = 0;
  const int trace_every = std::max(1, cfg.epochs / 20);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto shuffled = [&](std::size_t n, int salt) {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      Rng rng(Rng::derive(cfg.seed, 0x5eed0000ULL + static_cast<std::uint64_t>(epoch) * 17 +
                                        static_cast<std::uint64_t>(salt)));
      for (std::size_t i = n; i > 1; --i)
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)))]);
      return idx;
    };
    const auto order_u = shuffled(data.n_u(), 1);
    const auto order_v = shuffled(data.n_v(), 2);
    const auto order_l = shuffled(data.n_l(), 3);

    double ep_fu = 0, ep_fv = 0, ep_fl = 0;

    for (int step = 0; step < steps_per_epoch; ++step) {
      std::vector<Slot> slots;
      std::uint64_t slot_seq = 0;
      auto add_batch = [&](DataKind kind, const std::vector<std::size_t>& order, int batch,
                           std::size_t n_total) {
        if (n_total == 0) return;
        const int b = static_cast<int>(std::min<std::size_t>(batch, n_total));
        for (int j = 0; j < b; ++j) {
          const std::size_t i = order[(static_cast<std::size_t>(step) * b + j) % n_total];
          Slot s;
          s.kind = kind;
          s.weight = static_cast<double>(n_total) / b;
          s.rng_seed = Rng::derive(
              cfg.seed, 0xabcd0000ULL + (static_cast<std::uint64_t>(epoch) * 65536ULL +
                                         static_cast<std::uint64_t>(step)) *
                                            1024ULL +
                            slot_seq++);
          if (kind == DataKind::Unlabeled) {
            s.x = &data.unlabeled[i];
            s.u = nullptr;
          } else if (kind == DataKind::Virtual) {
            s.x = &data.virtual_x[i];
            s.u = nullptr;
          } else {
            s.x = &data.labeled_x[i];
            s.u = &u_rows[i];
          }
          slots.push_back(s);
        }
      };
      add_batch(DataKind::Unlabeled, order_u, cfg.batch_u, data.n_u());
      add_batch(DataKind::Virtual, order_v, cfg.batch_v, data.n_v());
      add_batch(DataKind::Labeled, order_l, cfg.batch_l, data.n_l());

      for (auto& g : chunk_grads) g.zero_params();
      std::vector<SlotResult> results;
      eval_slots(ev, model.cfg, slots, cfg.mc_train, &chunk_grads, workers, results);

      double st_fu = 0, st_fv = 0, st_fl = 0;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        const double v = results[s].value * slots[s].weight;
        switch (slots[s].kind) {
          case DataKind::Unlabeled: st_fu += v; break;
          case DataKind::Virtual: st_fv += v; break;
          case DataKind::Labeled: st_fl += v; break;
        }
      }
      const double st_total = st_fu + st_fv + st_fl;
      if (!std::isfinite(st_total))
        throw error("train: non-finite ELBO estimate at epoch " + std::to_string(epoch));
      ep_fu += st_fu;
      ep_fv += st_fv;
      ep_fl += st_fl;

      Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
      for (auto& g : chunk_grads) grad += g.flatten();
      grad -= cfg.weight_decay * theta_mask.cwiseProduct(params);

      double lr = cfg.lr;
      if (cfg.lr_cosine) {
        const double frac = static_cast<double>(step_counter) / std::max<long>(1, total_steps);
        lr = cfg.lr * (0.05 + 0.95 * 0.5 * (1.0 + std::cos(M_PI * frac)));
      }
      adam_step(params, grad, adam, lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
      model.assign(params);
      ++step_counter;
    }

    EpochRow row;
    row.epoch = epoch;
    row.f_u = ep_fu / steps_per_epoch;
    row.f_v = ep_fv / steps_per_epoch;
    row.f_l = ep_fl / steps_per_epoch;
    row.total = row.f_u + row.f_v + row.f_l;
    row.elbo16 = std::numeric_limits<double>::quiet_NaN();
    if (epoch % trace_every == 0 || epoch == cfg.epochs - 1) {
      row.elbo16 =
          evaluate_elbo(model, phys, data, cfg.mc_trace,
                        Rng::derive(cfg.seed, 0xe1b0ULL + static_cast<std::uint64_t>(epoch)),
                        workers, 32)
              .total;
    }
    result.trace.push_back(row);
    if (trace_csv)
      trace_csv << row.epoch << "," << format_double(row.f_u, 10) << ","
                << format_double(row.f_v, 10) << "," << format_double(row.f_l, 10) << ","
                << format_double(row.total, 10) << "," << format_double(row.elbo16, 10) << "\n";

    totals.push_back(row.total);
    const std::size_t win = std::min<std::size_t>(20, totals.size());
    const double smoothed =
        std::accumulate(totals.end() - static_cast<std::ptrdiff_t>(win), totals.end(), 0.0) / win;
    peak_smoothed = std::max(peak_smoothed, smoothed);
    result.best_smoothed = peak_smoothed;
    if (totals.size() >= 20 &&
        smoothed < peak_smoothed - cfg.divergence_drop * std::max(std::abs(peak_smoothed), 1.0)) {
      result.diverged = true;
      if (!out_dir.empty()) model.save_checkpoint(out_dir / "diverged.gp");
      std::cerr << "train: halting, smoothed ELBO collapsed (peak " << peak_smoothed << ", now "
                << smoothed << ")\n";
      break;
    }

    if (!out_dir.empty() && cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
      model.save_checkpoint(out_dir / ("checkpoint_" + std::to_string(epoch + 1) + ".gp"));
  }

  if (!out_dir.empty()) model.save_checkpoint(out_dir / "checkpoint.gp");
  return result;
}

}  // namespace genpanis
