// rsen/instance_norm.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>

#include "sdrtse/rsen.h"

namespace sdrtse {

torch::Tensor InstanceNorm(const torch::Tensor &feat, double eps) {
  if (feat.dim() < 2 || feat.size(-1) < 1)
    throw std::invalid_argument("InstanceNorm expects [..., C, T] with T >= 1");
  auto mean = feat.mean(-1, /*keepdim=*/true);
  auto centred = feat - mean;
  // The clamp keeps the gradient of a constant channel finite.
  auto std = centred.pow(2).mean(-1, /*keepdim=*/true).clamp_min(1e-20).sqrt();
  return centred / (std + eps);
}

void RsenOptions::Check() const {
  if (num_bins <= 0 || global_dim <= 0 || semantic_dim <= 0 || channels <= 0)
    throw std::invalid_argument("RSEN dimensions must be positive");
  if (blocks < 1 || kernel < 1 || kernel % 2 == 0)
    throw std::invalid_argument("RSEN needs >= 1 block and an odd kernel");
  if (downsample_blocks < 0 || downsample_blocks >= blocks)
    throw std::invalid_argument("downsample_blocks must lie in [0, blocks)");
}

torch::Tensor ReconstructionLoss(const torch::Tensor &estimate, const torch::Tensor &target) {
  if (estimate.sizes() != target.sizes())
    throw std::invalid_argument("reconstruction loss: shape mismatch");
  return (estimate - target).abs().mean();
}

torch::Tensor KlLoss(const torch::Tensor &semantic_mean) {
  return semantic_mean.pow(2).mean();
}

}  // namespace sdrtse
