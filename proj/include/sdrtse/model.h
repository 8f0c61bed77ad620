// sdrtse/model.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// The full system: reference encoders and decoder, the approximation network
// used for the MI bound, the disentanglement network, and the extractor.

#ifndef SDRTSE_MODEL_H_
#define SDRTSE_MODEL_H_

#include <torch/torch.h>

#include <optional>
#include <string>
#include <vector>

#include "sdrtse/config.h"
#include "sdrtse/gidn.h"
#include "sdrtse/mi.h"
#include "sdrtse/rsen.h"
#include "sdrtse/sen.h"

namespace sdrtse {

// Parameter collections, each optimised by a fixed subset of the phases.
enum class ParamGroup { kGlobalEncoder, kSemanticEncoder, kDecoder, kApprox, kGidn, kExtractor };

inline constexpr ParamGroup kAllGroups[] = {
    ParamGroup::kGlobalEncoder, ParamGroup::kSemanticEncoder, ParamGroup::kDecoder,
    ParamGroup::kApprox,        ParamGroup::kGidn,            ParamGroup::kExtractor};

// Submodule name, which is also the parameter-name prefix.
std::string ToString(ParamGroup group);

struct ReferenceEncoding {
  torch::Tensor spec;      // [B, F, T_g] magnitudes
  torch::Tensor z_g;       // [B, d_g, T_g]
  SemanticRepr z_c;        // [B, d_c, T_c]
  GidnOutput gidn;         // embedding is z_s [B, d_g]
  torch::Tensor pooled_g;  // [B, d_g]
  torch::Tensor pooled_c;  // [B, d_c], time mean of the posterior mean
};

struct ForwardOutput {
  ReferenceEncoding ref;
  torch::Tensor recon;     // [B, F, T_g]
  torch::Tensor estimate;  // [B, T]
};

class SdrTseImpl : public torch::nn::Module {
 public:
  explicit SdrTseImpl(const RunConfig &config);

  // Without `deterministic` the semantic sample carries fresh noise and the
  // decoder consumes it; otherwise everything uses posterior means.
  ReferenceEncoding EncodeReference(const torch::Tensor &reference, bool deterministic,
                                    std::optional<at::Generator> generator = std::nullopt);
  SenGuidance MakeGuidance(const ReferenceEncoding &ref) const;
  ForwardOutput forward(const torch::Tensor &mixture, const torch::Tensor &reference,
                        bool deterministic,
                        std::optional<at::Generator> generator = std::nullopt);
  // Inference path: reference -> guidance -> extractor; no reconstruction.
  torch::Tensor Extract(const torch::Tensor &mixture, const torch::Tensor &reference);

  std::vector<torch::Tensor> Parameters(ParamGroup group);
  std::vector<torch::Tensor> Parameters(std::initializer_list<ParamGroup> groups);
  const RunConfig &config() const { return config_; }

  GlobalEncoder global_encoder{nullptr};
  SemanticEncoder semantic_encoder{nullptr};
  SpectrogramDecoder decoder{nullptr};
  VariationalApprox approx{nullptr};
  Gidn gidn{nullptr};
  Extractor extractor{nullptr};

 private:
  RunConfig config_;
};
TORCH_MODULE(SdrTse);

}  // namespace sdrtse

#endif  // SDRTSE_MODEL_H_
