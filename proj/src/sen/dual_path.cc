// sen/dual_path.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <stdexcept>
#include <string>

#include "sdrtse/sen.h"

namespace sdrtse {

namespace F = torch::nn::functional;

int64_t NumSegments(int64_t length, int64_t chunk) {
  if (chunk < 2 || chunk % 2 != 0) throw std::invalid_argument("chunk length must be even");
  if (length < 1) throw std::invalid_argument("cannot segment an empty sequence");
  const int64_t hop = chunk / 2;
  const int64_t span = hop + length;
  if (span <= chunk) return 1;
  return (span - chunk + hop - 1) / hop + 1;
}

Segmented Segment(const torch::Tensor &features, int64_t chunk) {
  if (features.dim() != 3) throw std::invalid_argument("Segment expects [B, H, T]");
  const int64_t length = features.size(2);
  const int64_t segments = NumSegments(length, chunk);
  const int64_t hop = chunk / 2;
  const int64_t padded = (segments - 1) * hop + chunk;
  auto x = torch::constant_pad_nd(features, {hop, padded - hop - length});
  return {x.unfold(2, chunk, hop).permute({0, 1, 3, 2}).contiguous(), length};
}

torch::Tensor Merge(const torch::Tensor &chunks, int64_t length) {
  if (chunks.dim() != 4) throw std::invalid_argument("Merge expects [B, H, K, S]");
  const int64_t b = chunks.size(0), h = chunks.size(1), k = chunks.size(2),
                s = chunks.size(3);
  const int64_t hop = k / 2;
  if (s != NumSegments(length, k))
    throw std::invalid_argument("chunk count does not match the target length");
  const int64_t padded = (s - 1) * hop + k;
  auto fold = F::FoldFuncOptions({padded, 1}, {k, 1}).stride({hop, 1});
  auto summed = F::fold(chunks.reshape({b, h * k, s}), fold).view({b, h, padded});
  auto ones = torch::ones({1, k, s}, chunks.options().requires_grad(false));
  auto coverage = F::fold(ones, fold).view({1, 1, padded});
  return (summed / coverage).narrow(2, hop, length);
}

torch::Tensor PositionalEncoding2d(int64_t channels, int64_t chunk, int64_t segments,
                                   const torch::TensorOptions &options) {
  if (channels % 2 != 0)
    throw std::invalid_argument("2-D positional encoding needs an even feature dim");
  const int64_t half = channels / 2;
  auto opts = options.requires_grad(false);
  auto table = torch::zeros({channels, chunk, segments}, opts);
  auto encode = [&](int64_t positions) {
    auto pos = torch::arange(positions, opts).unsqueeze(0);      // [1, P]
    auto idx = torch::arange(half, opts);                        // [half]
    auto pair = torch::floor(idx / 2.0) * 2.0;
    auto freq = torch::exp(-std::log(10000.0) * pair / static_cast<double>(half)).unsqueeze(1);
    auto angle = freq * pos;                                     // [half, P]
    auto even = (torch::remainder(idx, 2) == 0).unsqueeze(1);
    return torch::where(even, torch::sin(angle), torch::cos(angle));
  };
  table.narrow(0, 0, half).copy_(encode(chunk).unsqueeze(2).expand({half, chunk, segments}));
  table.narrow(0, half, half)
      .copy_(encode(segments).unsqueeze(1).expand({half, chunk, segments}));
  return table;
}

torch::Tensor AddPositionalEncoding2d(const torch::Tensor &chunks) {
  if (chunks.dim() != 4) throw std::invalid_argument("expected chunked features [B, H, K, S]");
  return chunks + PositionalEncoding2d(chunks.size(1), chunks.size(2), chunks.size(3),
                                       chunks.options())
                      .unsqueeze(0);
}

DualPathStackImpl::DualPathStackImpl(const SenOptions &opts) : opts_(opts) {
  opts_.Check();
  const bool vector = UsesVector(opts.guidance);
  const bool amln = vector && opts.fusion == FusionMode::kAmln;
  auto build = [&](const std::string &prefix) {
    Pass pass;
    pass.layers.push_back(register_module(
        prefix + "_am",
        TransformerLayer(opts.feature_dim, opts.heads, opts.ff_dim,
                         amln ? opts.condition_dim : 0, opts.eps)));
    for (int l = 0; l < opts.plain_layers; ++l)
      pass.layers.push_back(register_module(
          prefix + "_layer" + std::to_string(l),
          TransformerLayer(opts.feature_dim, opts.heads, opts.ff_dim, 0, opts.eps)));
    if (vector && !amln)
      pass.vector_fusion = register_module(
          prefix + "_fusion", VectorFusion(opts.fusion, opts.feature_dim, opts.condition_dim));
    if (UsesSequence(opts.guidance))
      pass.cross_fusion = register_module(
          prefix + "_cross",
          CrossAttentionFusion(opts.feature_dim, opts.heads, opts.context_dim, opts.eps));
    pass.final_norm = register_module(
        prefix + "_norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({opts.feature_dim})));
    return pass;
  };
  for (int i = 0; i < opts.iterations; ++i) {
    intra_.push_back(build("intra" + std::to_string(i)));
    inter_.push_back(build("inter" + std::to_string(i)));
  }
}

torch::Tensor DualPathStackImpl::RunPass(Pass &pass, const torch::Tensor &seq,
                                         const torch::Tensor &vec, const torch::Tensor &ctx) {
  auto x = seq;
  if (pass.cross_fusion) x = pass.cross_fusion(x, ctx);
  if (pass.vector_fusion) x = pass.vector_fusion(x, vec);
  for (auto &layer : pass.layers) x = layer->adaptive() ? layer(x, vec) : layer(x);
  return pass.final_norm(x);
}

torch::Tensor DualPathStackImpl::forward(const torch::Tensor &chunks,
                                         const SenGuidance &guidance) {
  if (chunks.dim() != 4 || chunks.size(1) != opts_.feature_dim)
    throw std::invalid_argument("dual-path stack expects [B, H, K, S]");
  const int64_t b = chunks.size(0), h = chunks.size(1), k = chunks.size(2),
                s = chunks.size(3);
  const bool vector = UsesVector(opts_.guidance), sequence = UsesSequence(opts_.guidance);
  if (vector && (!guidance.vector.defined() || guidance.vector.size(0) != b ||
                 guidance.vector.size(1) != opts_.condition_dim))
    throw std::invalid_argument("guidance " + ToString(opts_.guidance) +
                                " needs a [B, " + std::to_string(opts_.condition_dim) +
                                "] vector");
  if (sequence && (!guidance.context.defined() || guidance.context.dim() != 3 ||
                   guidance.context.size(0) != b ||
                   guidance.context.size(1) != opts_.context_dim))
    throw std::invalid_argument("guidance " + ToString(opts_.guidance) +
                                " needs a [B, " + std::to_string(opts_.context_dim) +
                                ", T_c] context");
  torch::Tensor ctx_seq;
  if (sequence) ctx_seq = guidance.context.transpose(1, 2);  // [B, T_c, d_c]

  auto x = chunks;
  for (int i = 0; i < opts_.iterations; ++i) {
    // Intra: sequences of length K, one per (batch, chunk).
    auto seq = x.permute({0, 3, 2, 1}).reshape({b * s, k, h});
    auto vec = vector ? guidance.vector.repeat_interleave(s, 0) : torch::Tensor();
    auto ctx = sequence ? ctx_seq.repeat_interleave(s, 0) : torch::Tensor();
    seq = RunPass(intra_[i], seq, vec, ctx);
    x = x + seq.reshape({b, s, k, h}).permute({0, 3, 2, 1});
    // Inter: sequences of length S, one per (batch, intra position).
    seq = x.permute({0, 2, 3, 1}).reshape({b * k, s, h});
    vec = vector ? guidance.vector.repeat_interleave(k, 0) : torch::Tensor();
    ctx = sequence ? ctx_seq.repeat_interleave(k, 0) : torch::Tensor();
    seq = RunPass(inter_[i], seq, vec, ctx);
    x = x + seq.reshape({b, k, s, h}).permute({0, 3, 1, 2});
  }
  return x;
}

}  // namespace sdrtse
