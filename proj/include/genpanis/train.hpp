#pragma once

#include <filesystem>

#include "genpanis/dataset.hpp"
#include "genpanis/elbo.hpp"
#include "genpanis/obs.hpp"

namespace genpanis {

struct TrainConfig {
  double lr = 1e-3;
  bool lr_cosine = true;
  int epochs = 200;
  int batch_u = 64, batch_v = 16, batch_l = 32;
  int mc_train = 1;   // MC samples per datum during training
  int mc_trace = 16;  // MC samples for the reported ELBO trace
  double lambda = 1e3;
  double beta1 = 0.9, beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 1e-16;  // the (negligible) vague Gaussian prior on theta
  std::uint64_t seed = 0;
  int workers = 1;
  bool deterministic = false;
  int checkpoint_every = 0;  // epochs between checkpoints (0: final only)
  double divergence_drop = 0.5;

  void validate() const;
};

/// Mixed training data: unlabeled and virtual microstructures plus labeled
/// (microstructure, observation) pairs tied to fixed observation locations.
struct MixedDataset {
  std::vector<Microstructure> unlabeled;
  std::vector<Microstructure> virtual_x;
  std::vector<Microstructure> labeled_x;
  Eigen::MatrixXd labeled_u;       // N_l x d_obs
  Eigen::MatrixX2d obs_locations;  // d_obs x 2

  std::size_t n_u() const { return unlabeled.size(); }
  std::size_t n_v() const { return virtual_x.size(); }
  std::size_t n_l() const { return labeled_x.size(); }
  bool empty() const { return n_u() + n_v() + n_l() == 0; }
};

/// Slice a generated dataset into disjoint labeled/unlabeled/virtual parts; the
/// labeled observations are fine-solver values at the given locations, with
/// optional noise (snr <= 0 means noiseless).
MixedDataset make_mixed(const Dataset& ds, int n_l, int n_u, int n_v, const ObsSpec& obs,
                        double snr, std::uint64_t seed);

/// Bias-corrected first/second-moment gradient-ascent step.
struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;
  explicit AdamState(Eigen::Index n)
      : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad_ascent, AdamState& state,
               double lr, double beta1, double beta2, double eps);

struct EpochRow {
  int epoch = 0;
  double f_u = 0, f_v = 0, f_l = 0, total = 0;
  double elbo16 = 0;  // subsampled higher-variance-reduction estimate
};

struct TrainResult {
  std::vector<EpochRow> trace;
  bool diverged = false;
  double best_smoothed = 0;
};

/// Maximize F = F_u + F_v + F_l by doubly-stochastic gradient ascent. Writes
/// elbo_trace.csv and checkpoint.gp under out_dir when non-empty. Halts with a
/// state dump if the smoothed ELBO collapses from its peak.
TrainResult train(GenModel& model, const PhysicsContext& phys, const MixedDataset& data,
                  const TrainConfig& cfg, const std::filesystem::path& out_dir = {});

/// Full-dataset ELBO estimate (per-term totals) at S MC samples per datum.
EpochRow evaluate_elbo(const GenModel& model, const PhysicsContext& phys, const MixedDataset& data,
                       int mc_samples, std::uint64_t seed, int workers, std::size_t max_per_type);

}  // namespace genpanis
