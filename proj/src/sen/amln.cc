// sen/amln.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>

#include "sdrtse/sen.h"

namespace sdrtse {

torch::Tensor PlainLayerNorm(const torch::Tensor &x, double eps) {
  return torch::layer_norm(x, {x.size(-1)}, /*weight=*/{}, /*bias=*/{}, eps);
}

AmlnImpl::AmlnImpl(int64_t features, int64_t condition_dim, double eps) : eps_(eps) {
  if (features <= 0 || condition_dim <= 0)
    throw std::invalid_argument("AMLN needs positive feature and condition sizes");
  gamma = register_module("gamma", torch::nn::Linear(condition_dim, features));
  beta = register_module("beta", torch::nn::Linear(condition_dim, features));
  torch::NoGradGuard no_grad;
  gamma->bias.fill_(1.0);
  beta->bias.zero_();
}

torch::Tensor AmlnImpl::forward(const torch::Tensor &x, const torch::Tensor &condition) {
  if (x.dim() != 3 || condition.dim() != 2 || condition.size(0) != x.size(0))
    throw std::invalid_argument("AMLN expects x [N, L, H] and condition [N, D]");
  // Normalise first, then modulate.
  auto h = PlainLayerNorm(x, eps_);
  return gamma(condition).unsqueeze(1) * h + beta(condition).unsqueeze(1);
}

}  // namespace sdrtse
