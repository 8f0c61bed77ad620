// sdrtse/gidn.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Global information disentanglement: channel attention over the global
// latent followed by temporal pooling into the speaker embedding.

#ifndef SDRTSE_GIDN_H_
#define SDRTSE_GIDN_H_

#include <torch/torch.h>

#include "sdrtse/rsen.h"
#include "sdrtse/signal.h"

namespace sdrtse {

struct GidnOptions {
  int64_t channels = 256;
  int64_t reduction = 8;
  // Restores the printed sign of the similarity loss (repels the target).
  bool literal_similarity_sign = false;
};

class ChannelAttentionImpl : public torch::nn::Module {
 public:
  explicit ChannelAttentionImpl(const GidnOptions &opts);
  // z_g [B, C, T] -> weights [B, C] in (0, 1). The same two layers score the
  // average- and max-pooled descriptors.
  torch::Tensor forward(const torch::Tensor &z_g);

  torch::nn::Linear squeeze{nullptr};
  torch::nn::Linear excite{nullptr};
};
TORCH_MODULE(ChannelAttention);

// weights [B, C] broadcast over time of z_g [B, C, T].
torch::Tensor ApplyAttention(const torch::Tensor &z_g, const torch::Tensor &weights);

// Temporal mean of [B, C, T] -> [B, C].
torch::Tensor PoolEmbedding(const torch::Tensor &attended);

struct GidnOutput {
  torch::Tensor weights;
  torch::Tensor attended;
  torch::Tensor embedding;
};

class GidnImpl : public torch::nn::Module {
 public:
  explicit GidnImpl(const GidnOptions &opts);
  GidnOutput forward(const torch::Tensor &z_g);
  const GidnOptions &options() const { return opts_; }

  ChannelAttention attention{nullptr};

 private:
  GidnOptions opts_;
};
TORCH_MODULE(Gidn);

// Cosine similarity along the last axis; 0 when either side has zero norm.
torch::Tensor GuardedCosine(const torch::Tensor &a, const torch::Tensor &b);

// cos(z_x, z_v_hat) - cos(z_x, z_u_hat) per row, in [-2, 2]; minimising pulls
// the reference toward the extracted target. `literal_sign` flips it.
torch::Tensor SimilarityLoss(const torch::Tensor &z_x, const torch::Tensor &z_u_hat,
                             const torch::Tensor &z_v_hat, bool literal_sign = false);

// Waveform batch [B, T] -> speaker embedding [B, d_s] via STFT, E_g and GIDN.
torch::Tensor EmbedReference(const torch::Tensor &waves, const StftParams &stft,
                             GlobalEncoder &encoder, Gidn &gidn);
torch::Tensor EmbedReference(const Waveform &wave, const StftParams &stft,
                             GlobalEncoder &encoder, Gidn &gidn);

}  // namespace sdrtse

#endif  // SDRTSE_GIDN_H_
