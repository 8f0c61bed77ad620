// training/model.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sdrtse/model.h"

#include <stdexcept>

namespace sdrtse {

std::string ToString(ParamGroup group) {
  switch (group) {
    case ParamGroup::kGlobalEncoder: return "global_encoder";
    case ParamGroup::kSemanticEncoder: return "semantic_encoder";
    case ParamGroup::kDecoder: return "decoder";
    case ParamGroup::kApprox: return "approx";
    case ParamGroup::kGidn: return "gidn";
    case ParamGroup::kExtractor: return "extractor";
  }
  throw std::logic_error("bad parameter group");
}

SdrTseImpl::SdrTseImpl(const RunConfig &config) : config_(config) {
  config_.Resolve();
  config_.Check();
  global_encoder = register_module("global_encoder", GlobalEncoder(config_.rsen));
  semantic_encoder = register_module("semantic_encoder", SemanticEncoder(config_.rsen));
  decoder = register_module("decoder", SpectrogramDecoder(config_.rsen));
  approx = register_module("approx", VariationalApprox(config_.mi));
  gidn = register_module("gidn", Gidn(config_.gidn));
  extractor = register_module("extractor", Extractor(config_.sen));
}

ReferenceEncoding SdrTseImpl::EncodeReference(const torch::Tensor &reference,
                                              bool deterministic,
                                              std::optional<at::Generator> generator) {
  if (reference.dim() != 2 || reference.size(0) == 0)
    throw std::invalid_argument("reference batch must be non-empty [B, T]");
  ReferenceEncoding r;
  r.spec = StftMagnitude(reference, config_.stft);
  r.z_g = global_encoder(r.spec);
  r.z_c = semantic_encoder(r.spec, deterministic, generator);
  r.gidn = gidn(r.z_g);
  r.pooled_g = r.z_g.mean(-1);
  r.pooled_c = r.z_c.mean.mean(-1);
  return r;
}

SenGuidance SdrTseImpl::MakeGuidance(const ReferenceEncoding &ref) const {
  SenGuidance g;
  switch (config_.sen.guidance) {
    case Guidance::kSpeaker:
    case Guidance::kSemanticSpeaker:
      g.vector = ref.gidn.embedding;
      break;
    case Guidance::kGlobal:
    case Guidance::kSemanticGlobal:
      g.vector = ref.pooled_g;
      break;
    case Guidance::kSemantic:
      break;
  }
  if (UsesSequence(config_.sen.guidance)) g.context = ref.z_c.mean;
  return g;
}

ForwardOutput SdrTseImpl::forward(const torch::Tensor &mixture, const torch::Tensor &reference,
                                  bool deterministic, std::optional<at::Generator> generator) {
  if (mixture.dim() != 2 || mixture.size(0) != reference.size(0))
    throw std::invalid_argument("mixture and reference batches must be [B, T] and paired");
  ForwardOutput out;
  out.ref = EncodeReference(reference, deterministic, generator);
  out.recon = decoder(out.ref.z_g, out.ref.z_c.sample);
  out.estimate = extractor(mixture, MakeGuidance(out.ref));
  return out;
}

torch::Tensor SdrTseImpl::Extract(const torch::Tensor &mixture, const torch::Tensor &reference) {
  torch::NoGradGuard no_grad;
  auto ref = EncodeReference(reference, /*deterministic=*/true);
  return extractor(mixture, MakeGuidance(ref));
}

std::vector<torch::Tensor> SdrTseImpl::Parameters(ParamGroup group) {
  const std::string prefix = ToString(group) + ".";
  std::vector<torch::Tensor> out;
  for (const auto &item : named_parameters())
    if (item.key().rfind(prefix, 0) == 0) out.push_back(item.value());
  return out;
}

std::vector<torch::Tensor> SdrTseImpl::Parameters(std::initializer_list<ParamGroup> groups) {
  std::vector<torch::Tensor> out;
  for (auto g : groups) {
    auto part = Parameters(g);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace sdrtse
