// rsen/encoders.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>
#include <string>

#include "sdrtse/rsen.h"

namespace sdrtse {

namespace F = torch::nn::functional;

namespace {

constexpr double kSlope = 0.2;

torch::Tensor Activation(const torch::Tensor &x) {
  return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(kSlope));
}

void CheckSpec(const torch::Tensor &spec, int64_t bins) {
  if (spec.dim() != 3 || spec.size(1) != bins)
    throw std::invalid_argument("expected spectrogram batch [B, " + std::to_string(bins) +
                                ", T], got " + c10::str(spec.sizes()));
}

torch::nn::Conv1d Conv(int64_t in, int64_t out, int kernel, int stride = 1) {
  return torch::nn::Conv1d(
      torch::nn::Conv1dOptions(in, out, kernel).stride(stride).padding(kernel / 2));
}

}  // namespace

GlobalEncoderImpl::GlobalEncoderImpl(const RsenOptions &opts) : opts_(opts) {
  opts_.Check();
  input_ = register_module("input", Conv(opts.num_bins, opts.channels, opts.kernel));
  for (int b = 1; b < opts.blocks; ++b)
    blocks_->push_back(Conv(opts.channels, opts.channels, opts.kernel));
  register_module("blocks", blocks_);
  output_ = register_module("output", Conv(opts.channels, opts.global_dim, 1));
}

torch::Tensor GlobalEncoderImpl::forward(const torch::Tensor &spec) {
  CheckSpec(spec, opts_.num_bins);
  auto h = Activation(input_(torch::log1p(spec)));
  for (const auto &block : *blocks_) h = h + Activation(block->as<torch::nn::Conv1d>()->forward(h));
  return output_(h);
}

SemanticEncoderImpl::SemanticEncoderImpl(const RsenOptions &opts) : opts_(opts) {
  opts_.Check();
  input_ = register_module("input", Conv(opts.num_bins, opts.channels, opts.kernel));
  for (int b = 1; b < opts.blocks; ++b) {
    const int stride = b <= opts.downsample_blocks ? 2 : 1;
    blocks_->push_back(Conv(opts.channels, opts.channels, opts.kernel, stride));
  }
  register_module("blocks", blocks_);
  head_ = register_module("head", Conv(opts.channels, opts.semantic_dim, 1));
}

torch::Tensor SemanticEncoderImpl::Trunk(const torch::Tensor &spec,
                                         std::vector<torch::Tensor> *trace) {
  CheckSpec(spec, opts_.num_bins);
  auto normed = InstanceNorm(input_(torch::log1p(spec)), opts_.eps);
  if (trace) trace->push_back(normed);
  auto h = Activation(normed);
  int b = 1;
  for (const auto &block : *blocks_) {
    normed = InstanceNorm(block->as<torch::nn::Conv1d>()->forward(h), opts_.eps);
    if (trace) trace->push_back(normed);
    // Strided blocks change the time axis, so only same-rate blocks are residual.
    h = b <= opts_.downsample_blocks ? Activation(normed) : h + Activation(normed);
    ++b;
  }
  return h;
}

SemanticRepr SemanticEncoderImpl::forward(const torch::Tensor &spec, bool deterministic,
                                          std::optional<at::Generator> generator) {
  SemanticRepr out;
  out.mean = head_(Trunk(spec, nullptr));
  if (deterministic) {
    out.sample = out.mean;
  } else {
    auto noise = generator ? torch::randn(out.mean.sizes(), *generator, out.mean.options())
                           : torch::randn_like(out.mean);
    out.sample = out.mean + noise;
  }
  return out;
}

std::vector<torch::Tensor> SemanticEncoderImpl::NormalizedActivations(const torch::Tensor &spec) {
  std::vector<torch::Tensor> trace;
  Trunk(spec, &trace);
  return trace;
}

}  // namespace sdrtse
