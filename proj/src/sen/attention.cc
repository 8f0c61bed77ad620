// sen/attention.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>

#include "sdrtse/sen.h"

namespace sdrtse {

MultiHeadAttentionImpl::MultiHeadAttentionImpl(int64_t dim, int heads, int64_t kv_dim)
    : heads_(heads) {
  if (heads <= 0 || dim % heads != 0)
    throw std::invalid_argument("feature dim must be divisible by the head count");
  q_ = register_module("q", torch::nn::Linear(dim, dim));
  k_ = register_module("k", torch::nn::Linear(kv_dim, dim));
  v_ = register_module("v", torch::nn::Linear(kv_dim, dim));
  out_ = register_module("out", torch::nn::Linear(dim, dim));
}

torch::Tensor MultiHeadAttentionImpl::forward(const torch::Tensor &query,
                                              const torch::Tensor &key_value) {
  const int64_t n = query.size(0), lq = query.size(1), lk = key_value.size(1);
  auto split = [&](const torch::Tensor &t, int64_t len) {
    return t.view({n, len, heads_, -1}).transpose(1, 2);
  };
  auto q = split(q_(query), lq);
  auto k = split(k_(key_value), lk);
  auto v = split(v_(key_value), lk);
  auto attended = at::scaled_dot_product_attention(q, k, v);
  return out_(attended.transpose(1, 2).reshape({n, lq, -1}));
}

TransformerLayerImpl::TransformerLayerImpl(int64_t dim, int heads, int64_t ff_dim,
                                           int64_t condition_dim, double eps)
    : adaptive_(condition_dim > 0), eps_(eps) {
  if (adaptive_) {
    amln1_ = register_module("amln1", Amln(dim, condition_dim, eps));
    amln2_ = register_module("amln2", Amln(dim, condition_dim, eps));
  } else {
    ln1_ = register_module(
        "ln1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim}).eps(eps)));
    ln2_ = register_module(
        "ln2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim}).eps(eps)));
  }
  attention_ = register_module("attention", MultiHeadAttention(dim, heads, dim));
  ff1_ = register_module("ff1", torch::nn::Linear(dim, ff_dim));
  ff2_ = register_module("ff2", torch::nn::Linear(ff_dim, dim));
}

torch::Tensor TransformerLayerImpl::Norm(int which, const torch::Tensor &x,
                                         const torch::Tensor &condition) {
  if (adaptive_) {
    if (!condition.defined())
      throw std::invalid_argument("AM-Transformer layer called without a condition");
    return which == 1 ? amln1_(x, condition) : amln2_(x, condition);
  }
  return which == 1 ? ln1_(x) : ln2_(x);
}

torch::Tensor TransformerLayerImpl::forward(const torch::Tensor &x,
                                            const torch::Tensor &condition) {
  auto h = Norm(1, x, condition);
  auto y = x + attention_(h, h);
  return y + ff2_(torch::relu(ff1_(Norm(2, y, condition))));
}

}  // namespace sdrtse
