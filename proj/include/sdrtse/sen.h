// sdrtse/sen.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Speech extraction network: waveform encoder, dual-path masker built from
// adaptive-modulation Transformer layers, and a transposed-convolution decoder.
//
// Layouts: waveforms [B, T]; encoder features [B, H, T_d]; chunked features
// [B, H, K, S]; Transformer sequences [N, L, H].

#ifndef SDRTSE_SEN_H_
#define SDRTSE_SEN_H_

#include <torch/torch.h>

#include <string>

namespace sdrtse {

// How the vector guidance enters the masker. Sequence guidance (z_c) always
// enters through cross-attention.
enum class FusionMode { kAmln, kSummation, kConcatenation, kCrossAttention };

// Which reference-derived signal conditions the extractor.
enum class Guidance { kSpeaker, kGlobal, kSemantic, kSemanticGlobal, kSemanticSpeaker };

FusionMode ParseFusionMode(const std::string &name);
std::string ToString(FusionMode mode);
// Accepts z_s, z_g, z_c, z_c+z_g, z_c+z_s.
Guidance ParseGuidance(const std::string &name);
std::string ToString(Guidance guidance);
bool UsesVector(Guidance guidance);
bool UsesSequence(Guidance guidance);

struct SenOptions {
  int64_t feature_dim = 256;
  int kernel = 16;
  int stride = 8;
  int64_t chunk = 100;
  int iterations = 2;
  // Plain Transformer layers following the adaptive one in each pass.
  int plain_layers = 7;
  int heads = 4;
  int64_t ff_dim = 1024;
  // Width of the vector guidance (d_s or d_g) and of the sequence guidance (d_c).
  int64_t condition_dim = 256;
  int64_t context_dim = 256;
  FusionMode fusion = FusionMode::kAmln;
  Guidance guidance = Guidance::kSpeaker;
  bool positional_encoding = true;
  double eps = 1e-5;

  void Check() const;
};

struct SenGuidance {
  torch::Tensor vector;   // [B, condition_dim]
  torch::Tensor context;  // [B, context_dim, T_c]
};

struct Segmented {
  torch::Tensor chunks;  // [B, H, K, S]
  int64_t length = 0;    // original T_d
};

// Chunks of length K with hop K/2 after padding hop frames in front and
// completing the last chunk with zeros.
int64_t NumSegments(int64_t length, int64_t chunk);
Segmented Segment(const torch::Tensor &features, int64_t chunk);
// Overlap-add normalised by coverage; exact inverse of Segment.
torch::Tensor Merge(const torch::Tensor &chunks, int64_t length);

// Parameter-free table [H, K, S]: channels [0, H/2) encode the intra-chunk
// position, [H/2, H) the chunk index.
torch::Tensor PositionalEncoding2d(int64_t channels, int64_t chunk, int64_t segments,
                                   const torch::TensorOptions &options);
torch::Tensor AddPositionalEncoding2d(const torch::Tensor &chunks);

// Layer normalisation over the last axis without affine parameters.
torch::Tensor PlainLayerNorm(const torch::Tensor &x, double eps = 1e-5);

// Adaptive modulation layer norm: gamma(z) * LN(x) + beta(z).
class AmlnImpl : public torch::nn::Module {
 public:
  AmlnImpl(int64_t features, int64_t condition_dim, double eps = 1e-5);
  // x [N, L, H], condition [N, condition_dim].
  torch::Tensor forward(const torch::Tensor &x, const torch::Tensor &condition);

  torch::nn::Linear gamma{nullptr};
  torch::nn::Linear beta{nullptr};

 private:
  double eps_;
};
TORCH_MODULE(Amln);

class MultiHeadAttentionImpl : public torch::nn::Module {
 public:
  MultiHeadAttentionImpl(int64_t dim, int heads, int64_t kv_dim);
  torch::Tensor forward(const torch::Tensor &query, const torch::Tensor &key_value);

 private:
  int heads_;
  torch::nn::Linear q_{nullptr}, k_{nullptr}, v_{nullptr}, out_{nullptr};
};
TORCH_MODULE(MultiHeadAttention);

// Pre-norm Transformer encoder layer. With condition_dim > 0 both norms are
// AMLN (an AM-Transformer layer); otherwise they are ordinary layer norms.
class TransformerLayerImpl : public torch::nn::Module {
 public:
  TransformerLayerImpl(int64_t dim, int heads, int64_t ff_dim, int64_t condition_dim,
                       double eps = 1e-5);
  torch::Tensor forward(const torch::Tensor &x, const torch::Tensor &condition = {});
  bool adaptive() const { return adaptive_; }

 private:
  torch::Tensor Norm(int which, const torch::Tensor &x, const torch::Tensor &condition);

  bool adaptive_;
  double eps_;
  Amln amln1_{nullptr}, amln2_{nullptr};
  torch::nn::LayerNorm ln1_{nullptr}, ln2_{nullptr};
  MultiHeadAttention attention_{nullptr};
  torch::nn::Linear ff1_{nullptr}, ff2_{nullptr};
};
TORCH_MODULE(TransformerLayer);

// Summation / concatenation baselines for vector guidance.
class VectorFusionImpl : public torch::nn::Module {
 public:
  VectorFusionImpl(FusionMode mode, int64_t dim, int64_t condition_dim);
  torch::Tensor forward(const torch::Tensor &x, const torch::Tensor &condition);

 private:
  FusionMode mode_;
  torch::nn::Linear project_{nullptr};
  torch::nn::Linear merge_{nullptr};
};
TORCH_MODULE(VectorFusion);

// Frames attend to a time-resolved context; residual.
class CrossAttentionFusionImpl : public torch::nn::Module {
 public:
  CrossAttentionFusionImpl(int64_t dim, int heads, int64_t context_dim, double eps = 1e-5);
  // x [N, L, H], context [N, L_c, context_dim].
  torch::Tensor forward(const torch::Tensor &x, const torch::Tensor &context);

 private:
  double eps_;
  MultiHeadAttention attention_{nullptr};
};
TORCH_MODULE(CrossAttentionFusion);

// Applies the configured baseline fusion to chunked features [B, H, K, S]
// along the intra axis. Mode kCrossAttention expects context [B, d_c, T_c].
torch::Tensor FuseBaseline(const torch::Tensor &chunks, const torch::Tensor &guidance,
                           FusionMode mode, VectorFusion *vector_fusion,
                           CrossAttentionFusion *cross_fusion);

// Intra/inter alternation over chunked features.
class DualPathStackImpl : public torch::nn::Module {
 public:
  explicit DualPathStackImpl(const SenOptions &opts);
  torch::Tensor forward(const torch::Tensor &chunks, const SenGuidance &guidance);

 private:
  struct Pass {
    std::vector<TransformerLayer> layers;
    VectorFusion vector_fusion{nullptr};
    CrossAttentionFusion cross_fusion{nullptr};
    torch::nn::LayerNorm final_norm{nullptr};
  };
  torch::Tensor RunPass(Pass &pass, const torch::Tensor &seq, const torch::Tensor &vec,
                        const torch::Tensor &ctx);

  SenOptions opts_;
  std::vector<Pass> intra_, inter_;
};
TORCH_MODULE(DualPathStack);

class ExtractorImpl : public torch::nn::Module {
 public:
  explicit ExtractorImpl(const SenOptions &opts);

  // y [B, T] -> estimated target [B, T].
  torch::Tensor forward(const torch::Tensor &mixture, const SenGuidance &guidance);

  // Strided convolution + ReLU; input is right-padded to a whole number of hops.
  torch::Tensor Encode(const torch::Tensor &mixture);
  // Mask in [0, 1] with the shape of the encoder output.
  torch::Tensor EstimateMask(const torch::Tensor &encoded, const SenGuidance &guidance);
  // Transposed convolution, cropped to `length` samples.
  torch::Tensor Decode(const torch::Tensor &features, int64_t length);
  // Decode(mask * Encode(y)) with an externally supplied mask.
  torch::Tensor ExtractWithMask(const torch::Tensor &mixture, const torch::Tensor &mask);

  int64_t EncodedLength(int64_t samples) const;
  const SenOptions &options() const { return opts_; }

 private:
  SenOptions opts_;
  torch::nn::Conv1d encoder_{nullptr};
  torch::nn::ConvTranspose1d decoder_{nullptr};
  torch::nn::LayerNorm in_norm_{nullptr};
  torch::nn::Conv1d in_proj_{nullptr};
  DualPathStack stack_{nullptr};
  torch::nn::PReLU out_act_{nullptr};
  torch::nn::Conv1d out_proj_{nullptr};
};
TORCH_MODULE(Extractor);

}  // namespace sdrtse

#endif  // SDRTSE_SEN_H_
