// sen/extractor.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sdrtse/sen.h"

namespace sdrtse {

ExtractorImpl::ExtractorImpl(const SenOptions &opts) : opts_(opts) {
  opts_.Check();
  const int64_t h = opts.feature_dim;
  encoder_ = register_module(
      "encoder", torch::nn::Conv1d(torch::nn::Conv1dOptions(1, h, opts.kernel).stride(opts.stride)));
  decoder_ = register_module(
      "decoder", torch::nn::ConvTranspose1d(
                     torch::nn::ConvTranspose1dOptions(h, 1, opts.kernel).stride(opts.stride)));
  in_norm_ = register_module(
      "in_norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({h}).eps(opts.eps)));
  in_proj_ = register_module("in_proj", torch::nn::Conv1d(torch::nn::Conv1dOptions(h, h, 1)));
  stack_ = register_module("stack", DualPathStack(opts));
  out_act_ = register_module("out_act", torch::nn::PReLU());
  out_proj_ = register_module("out_proj", torch::nn::Conv1d(torch::nn::Conv1dOptions(h, h, 1)));
}

torch::Tensor ExtractorImpl::EstimateMask(const torch::Tensor &encoded,
                                          const SenGuidance &guidance) {
  auto h = in_proj_(in_norm_(encoded.transpose(1, 2)).transpose(1, 2));
  auto segmented = Segment(h, opts_.chunk);
  auto chunks = segmented.chunks;
  if (opts_.positional_encoding) chunks = AddPositionalEncoding2d(chunks);
  chunks = stack_(chunks, guidance);
  auto merged = Merge(chunks, segmented.length);
  return torch::sigmoid(out_proj_(out_act_(merged)));
}

torch::Tensor ExtractorImpl::forward(const torch::Tensor &mixture,
                                     const SenGuidance &guidance) {
  auto encoded = Encode(mixture);
  auto mask = EstimateMask(encoded, guidance);
  return Decode(mask * encoded, mixture.size(1));
}

}  // namespace sdrtse
