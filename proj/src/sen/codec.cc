// sen/codec.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>
#include <string>

#include "sdrtse/sen.h"

namespace sdrtse {

void SenOptions::Check() const {
  if (feature_dim <= 0 || feature_dim % 2 != 0)
    throw std::invalid_argument("feature dim H must be positive and even");
  if (heads <= 0 || feature_dim % heads != 0)
    throw std::invalid_argument("feature dim must be divisible by the head count");
  if (kernel <= 0 || stride <= 0 || stride > kernel)
    throw std::invalid_argument("encoder needs 0 < stride <= kernel");
  if (chunk < 2 || chunk % 2 != 0) throw std::invalid_argument("chunk length must be even");
  if (iterations < 1 || plain_layers < 0 || ff_dim <= 0)
    throw std::invalid_argument("invalid Transformer stack configuration");
  if (condition_dim <= 0 || context_dim <= 0)
    throw std::invalid_argument("guidance dimensions must be positive");
  if (UsesVector(guidance) && fusion == FusionMode::kCrossAttention)
    throw std::invalid_argument("cross_attention fusion only applies to z_c guidance");
}

int64_t ExtractorImpl::EncodedLength(int64_t samples) const {
  if (samples < opts_.kernel)
    throw std::invalid_argument("mixture of " + std::to_string(samples) +
                                " samples is shorter than the encoder kernel");
  return (samples - opts_.kernel + opts_.stride - 1) / opts_.stride + 1;
}

torch::Tensor ExtractorImpl::Encode(const torch::Tensor &mixture) {
  if (mixture.dim() != 2) throw std::invalid_argument("mixture batch must be [B, T]");
  const int64_t frames = EncodedLength(mixture.size(1));
  const int64_t padded = (frames - 1) * opts_.stride + opts_.kernel;
  auto x = torch::constant_pad_nd(mixture, {0, padded - mixture.size(1)}).unsqueeze(1);
  return torch::relu(encoder_(x));
}

torch::Tensor ExtractorImpl::Decode(const torch::Tensor &features, int64_t length) {
  if (features.dim() != 3 || features.size(1) != opts_.feature_dim)
    throw std::invalid_argument("decoder expects [B, H, T_d]");
  auto out = decoder_(features).squeeze(1);
  if (out.size(1) < length) throw std::invalid_argument("decoded signal is too short");
  return out.narrow(1, 0, length);
}

torch::Tensor ExtractorImpl::ExtractWithMask(const torch::Tensor &mixture,
                                             const torch::Tensor &mask) {
  auto encoded = Encode(mixture);
  if (mask.sizes() != encoded.sizes())
    throw std::invalid_argument("mask shape differs from the encoder output");
  return Decode(mask * encoded, mixture.size(1));
}

}  // namespace sdrtse
