// sdrtse/rsen.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Reference speech encoding network: a global encoder, a semantic encoder with
// an instance-normalisation bottleneck, and an AdaIN-conditioned spectrogram
// decoder. Spectrogram batches are [B, F, T]; latents are [B, C, T].

#ifndef SDRTSE_RSEN_H_
#define SDRTSE_RSEN_H_

#include <torch/torch.h>

#include <optional>
#include <vector>

namespace sdrtse {

struct RsenOptions {
  int64_t num_bins = 257;
  int64_t global_dim = 256;
  int64_t semantic_dim = 256;
  int64_t channels = 256;
  int blocks = 4;
  int kernel = 5;
  // Leading semantic-encoder blocks that halve the time axis.
  int downsample_blocks = 2;
  double eps = 1e-5;

  int64_t TimeFactor() const { return int64_t{1} << downsample_blocks; }
  void Check() const;
};

// Per-channel temporal normalisation of [..., C, T]: (x - mean_t) / (std_t + eps).
torch::Tensor InstanceNorm(const torch::Tensor &feat, double eps = 1e-5);

struct SemanticRepr {
  torch::Tensor mean;
  torch::Tensor sample;
};

class GlobalEncoderImpl : public torch::nn::Module {
 public:
  explicit GlobalEncoderImpl(const RsenOptions &opts);
  // X: [B, F, T] magnitudes -> z_g [B, d_g, T]. No normalisation layers.
  torch::Tensor forward(const torch::Tensor &spec);

 private:
  RsenOptions opts_;
  torch::nn::Conv1d input_{nullptr};
  torch::nn::ModuleList blocks_;
  torch::nn::Conv1d output_{nullptr};
};
TORCH_MODULE(GlobalEncoder);

class SemanticEncoderImpl : public torch::nn::Module {
 public:
  explicit SemanticEncoderImpl(const RsenOptions &opts);
  // The sample is mean + N(0, I) noise unless deterministic, in which case it
  // aliases the mean.
  SemanticRepr forward(const torch::Tensor &spec, bool deterministic,
                       std::optional<at::Generator> generator = std::nullopt);
  // Post-normalisation activations of every block, for inspection.
  std::vector<torch::Tensor> NormalizedActivations(const torch::Tensor &spec);

 private:
  torch::Tensor Trunk(const torch::Tensor &spec, std::vector<torch::Tensor> *trace);

  RsenOptions opts_;
  torch::nn::Conv1d input_{nullptr};
  torch::nn::ModuleList blocks_;
  torch::nn::Conv1d head_{nullptr};
};
TORCH_MODULE(SemanticEncoder);

class SpectrogramDecoderImpl : public torch::nn::Module {
 public:
  explicit SpectrogramDecoderImpl(const RsenOptions &opts);
  // Pools z_g over time and reconstructs [B, F, T_g].
  torch::Tensor forward(const torch::Tensor &z_g, const torch::Tensor &z_c);
  // Reconstruction from an already pooled global vector [B, d_g].
  torch::Tensor Reconstruct(const torch::Tensor &pooled_g, const torch::Tensor &z_c,
                            int64_t frames);

 private:
  RsenOptions opts_;
  torch::nn::Conv1d input_{nullptr};
  torch::nn::ModuleList convs_;
  torch::nn::ModuleList gammas_;
  torch::nn::ModuleList betas_;
  torch::nn::Conv1d output_{nullptr};
};
TORCH_MODULE(SpectrogramDecoder);

// Mean absolute error between spectrogram batches of equal shape.
torch::Tensor ReconstructionLoss(const torch::Tensor &estimate, const torch::Tensor &target);

// Mean of squared entries of the semantic posterior mean.
torch::Tensor KlLoss(const torch::Tensor &semantic_mean);

}  // namespace sdrtse

#endif  // SDRTSE_RSEN_H_
