// rsen/decoder.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>
#include <string>

#include "sdrtse/rsen.h"

namespace sdrtse {

namespace F = torch::nn::functional;

SpectrogramDecoderImpl::SpectrogramDecoderImpl(const RsenOptions &opts) : opts_(opts) {
  opts_.Check();
  input_ = register_module(
      "input", torch::nn::Conv1d(torch::nn::Conv1dOptions(opts.semantic_dim, opts.channels, 1)));
  for (int b = 0; b < opts.blocks; ++b) {
    convs_->push_back(torch::nn::Conv1d(
        torch::nn::Conv1dOptions(opts.channels, opts.channels, opts.kernel)
            .padding(opts.kernel / 2)));
    torch::nn::Linear gamma(opts.global_dim, opts.channels);
    torch::nn::Linear beta(opts.global_dim, opts.channels);
    {
      torch::NoGradGuard no_grad;
      gamma->bias.fill_(1.0);
      beta->bias.zero_();
    }
    gammas_->push_back(gamma);
    betas_->push_back(beta);
  }
  register_module("convs", convs_);
  register_module("gammas", gammas_);
  register_module("betas", betas_);
  output_ = register_module(
      "output", torch::nn::Conv1d(torch::nn::Conv1dOptions(opts.channels, opts.num_bins, 1)));
}

torch::Tensor SpectrogramDecoderImpl::forward(const torch::Tensor &z_g,
                                              const torch::Tensor &z_c) {
  if (z_g.dim() != 3) throw std::invalid_argument("decoder expects z_g as [B, d_g, T_g]");
  return Reconstruct(z_g.mean(-1), z_c, z_g.size(-1));
}

torch::Tensor SpectrogramDecoderImpl::Reconstruct(const torch::Tensor &pooled_g,
                                                  const torch::Tensor &z_c, int64_t frames) {
  if (z_c.dim() != 3 || z_c.size(1) != opts_.semantic_dim)
    throw std::invalid_argument("decoder expects z_c as [B, d_c, T_c]");
  if (pooled_g.dim() != 2 || pooled_g.size(1) != opts_.global_dim ||
      pooled_g.size(0) != z_c.size(0))
    throw std::invalid_argument("decoder expects pooled z_g as [B, d_g]");
  const int64_t upsampled = z_c.size(-1) * opts_.TimeFactor();
  if (upsampled < frames || upsampled - frames >= opts_.TimeFactor())
    throw std::invalid_argument("semantic length " + std::to_string(z_c.size(-1)) +
                                " cannot be upsampled to " + std::to_string(frames) +
                                " frames");
  auto h = input_(z_c);
  for (int b = 0; b < opts_.blocks; ++b) {
    if (b < opts_.downsample_blocks) h = h.repeat_interleave(2, -1);
    auto normed = InstanceNorm(convs_[b]->as<torch::nn::Conv1d>()->forward(h), opts_.eps);
    auto gamma = gammas_[b]->as<torch::nn::Linear>()->forward(pooled_g).unsqueeze(-1);
    auto beta = betas_[b]->as<torch::nn::Linear>()->forward(pooled_g).unsqueeze(-1);
    h = F::leaky_relu(gamma * normed + beta, F::LeakyReLUFuncOptions().negative_slope(0.2));
  }
  return F::softplus(output_(h)).narrow(-1, 0, frames);
}

}  // namespace sdrtse
