// gidn/speaker_embedding.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>

#include "sdrtse/gidn.h"

namespace sdrtse {

torch::Tensor GuardedCosine(const torch::Tensor &a, const torch::Tensor &b) {
  if (a.sizes() != b.sizes()) throw std::invalid_argument("cosine: shape mismatch");
  auto dot = (a * b).sum(-1);
  auto norms = a.norm(2, -1) * b.norm(2, -1);
  auto valid = norms > 1e-12;
  // Dividing by a clamped norm keeps the backward pass finite for zero vectors.
  // Rounding can push collinear vectors a few ulp past +-1.
  auto cos = (dot / norms.clamp_min(1e-12)).clamp(-1.0, 1.0);
  return torch::where(valid, cos, torch::zeros_like(dot));
}

torch::Tensor SimilarityLoss(const torch::Tensor &z_x, const torch::Tensor &z_u_hat,
                             const torch::Tensor &z_v_hat, bool literal_sign) {
  auto loss = GuardedCosine(z_x, z_v_hat) - GuardedCosine(z_x, z_u_hat);
  return literal_sign ? -loss : loss;
}

torch::Tensor EmbedReference(const torch::Tensor &waves, const StftParams &stft,
                             GlobalEncoder &encoder, Gidn &gidn) {
  auto batch = waves.dim() == 1 ? waves.unsqueeze(0) : waves;
  auto spec = StftMagnitude(batch, stft);
  return gidn(encoder(spec)).embedding;
}

torch::Tensor EmbedReference(const Waveform &wave, const StftParams &stft,
                             GlobalEncoder &encoder, Gidn &gidn) {
  wave.Check();
  return EmbedReference(wave.ToTensor(), stft, encoder, gidn).squeeze(0);
}

}  // namespace sdrtse
