// sen/fusion.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>

#include "sdrtse/sen.h"

namespace sdrtse {

FusionMode ParseFusionMode(const std::string &name) {
  if (name == "amln") return FusionMode::kAmln;
  if (name == "summation") return FusionMode::kSummation;
  if (name == "concatenation") return FusionMode::kConcatenation;
  if (name == "cross_attention") return FusionMode::kCrossAttention;
  throw std::invalid_argument("unknown fusion mode '" + name + "'");
}

std::string ToString(FusionMode mode) {
  switch (mode) {
    case FusionMode::kAmln: return "amln";
    case FusionMode::kSummation: return "summation";
    case FusionMode::kConcatenation: return "concatenation";
    case FusionMode::kCrossAttention: return "cross_attention";
  }
  return "?";
}

Guidance ParseGuidance(const std::string &name) {
  if (name == "z_s") return Guidance::kSpeaker;
  if (name == "z_g") return Guidance::kGlobal;
  if (name == "z_c") return Guidance::kSemantic;
  if (name == "z_c+z_g") return Guidance::kSemanticGlobal;
  if (name == "z_c+z_s") return Guidance::kSemanticSpeaker;
  throw std::invalid_argument("unknown guidance '" + name + "'");
}

std::string ToString(Guidance guidance) {
  switch (guidance) {
    case Guidance::kSpeaker: return "z_s";
    case Guidance::kGlobal: return "z_g";
    case Guidance::kSemantic: return "z_c";
    case Guidance::kSemanticGlobal: return "z_c+z_g";
    case Guidance::kSemanticSpeaker: return "z_c+z_s";
  }
  return "?";
}

bool UsesVector(Guidance guidance) { return guidance != Guidance::kSemantic; }

bool UsesSequence(Guidance guidance) {
  return guidance == Guidance::kSemantic || guidance == Guidance::kSemanticGlobal ||
         guidance == Guidance::kSemanticSpeaker;
}

VectorFusionImpl::VectorFusionImpl(FusionMode mode, int64_t dim, int64_t condition_dim)
    : mode_(mode) {
  if (mode == FusionMode::kSummation) {
    project_ = register_module(
        "project", torch::nn::Linear(torch::nn::LinearOptions(condition_dim, dim).bias(false)));
  } else if (mode == FusionMode::kConcatenation) {
    project_ = register_module("project", torch::nn::Linear(condition_dim, dim));
    merge_ = register_module("merge", torch::nn::Linear(2 * dim, dim));
  } else {
    throw std::invalid_argument("vector fusion supports summation or concatenation only");
  }
}

torch::Tensor VectorFusionImpl::forward(const torch::Tensor &x, const torch::Tensor &condition) {
  if (x.dim() != 3 || condition.dim() != 2 || condition.size(0) != x.size(0))
    throw std::invalid_argument("vector fusion expects x [N, L, H] and condition [N, D]");
  auto p = project_(condition).unsqueeze(1);
  if (mode_ == FusionMode::kSummation) return x + p;
  return merge_(torch::cat({x, p.expand({-1, x.size(1), -1})}, -1));
}

CrossAttentionFusionImpl::CrossAttentionFusionImpl(int64_t dim, int heads,
                                                   int64_t context_dim, double eps)
    : eps_(eps) {
  attention_ = register_module("attention", MultiHeadAttention(dim, heads, context_dim));
}

torch::Tensor CrossAttentionFusionImpl::forward(const torch::Tensor &x,
                                                const torch::Tensor &context) {
  if (x.dim() != 3 || context.dim() != 3 || context.size(0) != x.size(0))
    throw std::invalid_argument("cross-attention expects x [N, L, H] and context [N, L_c, D]");
  return x + attention_(PlainLayerNorm(x, eps_), context);
}

torch::Tensor FuseBaseline(const torch::Tensor &chunks, const torch::Tensor &guidance,
                           FusionMode mode, VectorFusion *vector_fusion,
                           CrossAttentionFusion *cross_fusion) {
  if (chunks.dim() != 4) throw std::invalid_argument("expected chunked features [B, H, K, S]");
  const int64_t b = chunks.size(0), h = chunks.size(1), k = chunks.size(2),
                s = chunks.size(3);
  auto seq = chunks.permute({0, 3, 2, 1}).reshape({b * s, k, h});
  torch::Tensor fused;
  switch (mode) {
    case FusionMode::kSummation:
    case FusionMode::kConcatenation:
      if (vector_fusion == nullptr) throw std::invalid_argument("missing vector fusion module");
      fused = (*vector_fusion)(seq, guidance.repeat_interleave(s, 0));
      break;
    case FusionMode::kCrossAttention:
      if (cross_fusion == nullptr) throw std::invalid_argument("missing cross-attention module");
      fused = (*cross_fusion)(seq, guidance.transpose(1, 2).repeat_interleave(s, 0));
      break;
    default:
      throw std::invalid_argument("FuseBaseline does not handle mode " + ToString(mode));
  }
  return fused.reshape({b, s, k, h}).permute({0, 3, 2, 1});
}

}  // namespace sdrtse
