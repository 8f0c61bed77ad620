// gidn/channel_attention.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>

#include "sdrtse/gidn.h"

namespace sdrtse {

ChannelAttentionImpl::ChannelAttentionImpl(const GidnOptions &opts) {
  if (opts.channels <= 0 || opts.reduction <= 0)
    throw std::invalid_argument("channel attention needs positive sizes");
  const int64_t hidden = std::max<int64_t>(1, opts.channels / opts.reduction);
  squeeze = register_module("squeeze", torch::nn::Linear(opts.channels, hidden));
  excite = register_module("excite", torch::nn::Linear(hidden, opts.channels));
}

torch::Tensor ChannelAttentionImpl::forward(const torch::Tensor &z_g) {
  if (z_g.dim() != 3 || z_g.size(-1) < 1)
    throw std::invalid_argument("channel attention expects [B, C, T] with T >= 1");
  auto avg = z_g.mean(-1);
  auto max = std::get<0>(z_g.max(-1));
  auto score = excite(torch::relu(squeeze(avg))) + excite(torch::relu(squeeze(max)));
  return torch::sigmoid(score);
}

torch::Tensor ApplyAttention(const torch::Tensor &z_g, const torch::Tensor &weights) {
  if (z_g.dim() != 3 || weights.dim() != 2 || weights.size(0) != z_g.size(0) ||
      weights.size(1) != z_g.size(1))
    throw std::invalid_argument("attention weights must be [B, C] for z_g [B, C, T]");
  return z_g * weights.unsqueeze(-1);
}

torch::Tensor PoolEmbedding(const torch::Tensor &attended) {
  if (attended.dim() != 3 || attended.size(-1) < 1)
    throw std::invalid_argument("pooling expects [B, C, T] with T >= 1");
  return attended.mean(-1);
}

GidnImpl::GidnImpl(const GidnOptions &opts) : opts_(opts) {
  attention = register_module("attention", ChannelAttention(opts));
}

GidnOutput GidnImpl::forward(const torch::Tensor &z_g) {
  GidnOutput out;
  out.weights = attention(z_g);
  out.attended = ApplyAttention(z_g, out.weights);
  out.embedding = PoolEmbedding(out.attended);
  return out;
}

}  // namespace sdrtse
