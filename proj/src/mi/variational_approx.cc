// mi/variational_approx.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>

#include "sdrtse/mi.h"

namespace sdrtse {

namespace {

torch::nn::Sequential MakeStack(const VariationalApproxOptions &opts) {
  torch::nn::Sequential net;
  int64_t in = opts.condition_dim;
  for (int l = 0; l + 1 < opts.layers; ++l) {
    net->push_back(torch::nn::Linear(in, opts.hidden));
    net->push_back(torch::nn::ReLU());
    in = opts.hidden;
  }
  net->push_back(torch::nn::Linear(in, opts.target_dim));
  return net;
}

}  // namespace

VariationalApproxImpl::VariationalApproxImpl(const VariationalApproxOptions &opts)
    : opts_(opts) {
  if (opts.condition_dim <= 0 || opts.target_dim <= 0 || opts.hidden <= 0 || opts.layers < 1)
    throw std::invalid_argument("invalid variational approximation dimensions");
  if (!(opts.logvar_min < opts.logvar_max))
    throw std::invalid_argument("empty log-variance range");
  mean_net_ = register_module("mean", MakeStack(opts));
  logvar_net_ = register_module("logvar", MakeStack(opts));
}

DiagonalGaussian VariationalApproxImpl::forward(const torch::Tensor &condition) {
  if (condition.dim() != 2 || condition.size(1) != opts_.condition_dim)
    throw std::invalid_argument("condition must be [N, " +
                                std::to_string(opts_.condition_dim) + "]");
  return {mean_net_->forward(condition),
          logvar_net_->forward(condition).clamp(opts_.logvar_min, opts_.logvar_max)};
}

}  // namespace sdrtse
