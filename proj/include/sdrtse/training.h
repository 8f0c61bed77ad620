// sdrtse/training.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Alternating optimisation. Each step runs three phases on one batch:
//   1. the approximation network V maximises the log-likelihood of the
//      (detached) semantic latents given the global latents;
//   2. E_g, E_c, D, G and the extractor F minimise the weighted sum of the
//      negative SI-SNR, reconstruction, prior and MI-bound terms, V frozen;
//   3. G and E_g minimise the similarity loss with F frozen.

#ifndef SDRTSE_TRAINING_H_
#define SDRTSE_TRAINING_H_

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdrtse/config.h"
#include "sdrtse/corpus.h"
#include "sdrtse/model.h"

namespace sdrtse {

struct Batch {
  torch::Tensor mixture;    // [B, T]
  torch::Tensor target;     // [B, T]
  torch::Tensor reference;  // [B, T_r]
};

// Waveforms of a manifest split held in memory. Items of one set must share
// their lengths so that they batch without padding.
struct TripletSet {
  std::vector<torch::Tensor> mixtures, targets, references;
  std::vector<std::string> speakers;
  int sample_rate = 0;

  static TripletSet Load(const Manifest &manifest);
  size_t size() const { return mixtures.size(); }
  Batch Gather(const std::vector<int64_t> &indices) const;
};

struct LossRecord {
  int64_t step = 0;
  double l_sisnr = 0.0;
  double l_rec = 0.0;
  double l_kl = 0.0;
  double i_vclub = 0.0;
  double l_ll = 0.0;
  double l_sim = 0.0;
  std::optional<double> val_si_snri;

  nlohmann::json ToJson() const;
  static LossRecord FromJson(const nlohmann::json &j);
};

// Raised when a loss or gradient norm is not finite; the state is rolled back.
class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainState {
 public:
  explicit TrainState(const RunConfig &config);

  RunConfig config;
  SdrTse model{nullptr};
  std::unique_ptr<torch::optim::Adam> approx_opt;
  std::unique_ptr<torch::optim::Adam> main_opt;
  std::unique_ptr<torch::optim::Adam> sim_opt;
  int64_t step = 0;
  // Batch sampling: shuffled epoch order and a cursor into it.
  std::mt19937_64 data_rng;
  std::vector<int64_t> order;
  int64_t cursor = 0;
  // Noise for the semantic posterior sample.
  at::Generator noise;
  // Validation bookkeeping.
  double best_val = -std::numeric_limits<double>::infinity();
  int64_t best_step = -1;
  int evals_since_best = 0;
  // Set for states restored from an inference-only export.
  bool inference_only = false;
};

// Deep copy of Adam moments, one entry per parameter in optimiser order.
struct AdamMoments {
  bool present = false;
  int64_t step = 0;
  torch::Tensor exp_avg, exp_avg_sq;
};
std::vector<AdamMoments> ExportAdamState(torch::optim::Adam &opt);
void ImportAdamState(torch::optim::Adam &opt, const std::vector<AdamMoments> &moments);

// Next batch of the epoch loop; reshuffles when an epoch is exhausted and
// applies the configured random crop to mixture and target.
Batch SampleBatch(TrainState &state, const TripletSet &data);

struct MainLosses {
  torch::Tensor total;
  torch::Tensor l_sisnr, l_rec, l_kl, i_vclub;
};

// Weighted phase-2 objective on an already computed forward pass.
MainLosses MainObjective(TrainState &state, const Batch &batch, const ForwardOutput &out);

// Phase functions, exposed for partition tests. Each checks finiteness and
// throws NonFiniteLoss before touching the optimiser.
double ApproxPhase(TrainState &state, const ReferenceEncoding &ref);
MainLosses MainPhase(TrainState &state, const Batch &batch, const ForwardOutput &out);
double SimilarityPhase(TrainState &state, const Batch &batch, const torch::Tensor &estimate);

// One full step; on failure every parameter and optimiser moment is restored.
LossRecord Step(TrainState &state, const Batch &batch);

// Mean SI-SNRi in dB of deterministic extraction over (at most `limit`) items.
double Validate(TrainState &state, const TripletSet &data, int limit = 0);

struct TrainOptions {
  std::filesystem::path out_dir;
  bool verbose = false;
  // Called after each logged record.
  std::function<void(const LossRecord &, TrainState &)> on_record;
};

struct TrainResult {
  int64_t steps = 0;
  bool converged = false;
  double best_val = 0.0;
  int64_t best_step = -1;
  std::filesystem::path final_checkpoint;
  std::filesystem::path best_checkpoint;
  std::filesystem::path log_path;
};

// Runs until max_steps or until validation stops improving. Writes
// metrics.jsonl, checkpoints/step_*.ckpt, best.ckpt and final.ckpt under
// out_dir; a resumed state continues the same trajectory.
TrainResult Train(TrainState &state, const TripletSet &train, const TripletSet &val,
                  const TrainOptions &opts);

// Loss records of a metrics log, in file order.
std::vector<LossRecord> ReadMetricsLog(const std::filesystem::path &path);

}  // namespace sdrtse

#endif  // SDRTSE_TRAINING_H_
