// sdrtse/mi.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Variational CLUB upper bound on the mutual information between paired
// latents c (target) and g (condition). Batches are [N, D].

#ifndef SDRTSE_MI_H_
#define SDRTSE_MI_H_

#include <torch/torch.h>

#include <cstdint>

namespace sdrtse {

struct VariationalApproxOptions {
  int64_t condition_dim = 256;
  int64_t target_dim = 256;
  int64_t hidden = 256;
  // Fully connected layers in each of the mean and log-variance stacks.
  int layers = 4;
  double logvar_min = -10.0;
  double logvar_max = 10.0;
};

struct DiagonalGaussian {
  torch::Tensor mean;
  torch::Tensor logvar;
};

// q(c | g) as a diagonal Gaussian with separate mean and log-variance networks.
class VariationalApproxImpl : public torch::nn::Module {
 public:
  explicit VariationalApproxImpl(const VariationalApproxOptions &opts);
  DiagonalGaussian forward(const torch::Tensor &condition);
  const VariationalApproxOptions &options() const { return opts_; }

 private:
  VariationalApproxOptions opts_;
  torch::nn::Sequential mean_net_{nullptr};
  torch::nn::Sequential logvar_net_{nullptr};
};
TORCH_MODULE(VariationalApprox);

// log N(c_i; mu(g_i), diag sigma^2(g_i)) for each pair -> [N].
torch::Tensor LogQ(const torch::Tensor &c, const torch::Tensor &g, VariationalApprox &approx);

// Matrix L[i, j] = log q(c_j | g_i) -> [N, N].
torch::Tensor PairwiseLogQ(const torch::Tensor &c, const torch::Tensor &g,
                           VariationalApprox &approx);

// (1/N) sum_i [ log q(c_i|g_i) - (1/N) sum_j log q(c_j|g_i) ].
torch::Tensor VclubEstimate(const torch::Tensor &c, const torch::Tensor &g,
                            VariationalApprox &approx);

// (1/N) sum_i log q(c_i|g_i); the approximation is trained to maximise it.
torch::Tensor LogLikelihood(const torch::Tensor &c, const torch::Tensor &g,
                            VariationalApprox &approx);

struct VclubProbeOptions {
  int64_t hidden = 64;
  int steps = 500;
  double learning_rate = 1e-3;
  uint64_t seed = 0;
};

// Fits a fresh approximation to the pairs (full batch) and returns the
// resulting estimate. Used to monitor dependence between frozen latents.
double ProbeVclub(const torch::Tensor &c, const torch::Tensor &g,
                  const VclubProbeOptions &opts = {});

}  // namespace sdrtse

#endif  // SDRTSE_MI_H_
