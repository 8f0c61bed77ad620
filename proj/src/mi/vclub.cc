// mi/vclub.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sdrtse/mi.h"

namespace sdrtse {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void CheckPairs(const torch::Tensor &c, const torch::Tensor &g,
                const VariationalApprox &approx) {
  if (c.dim() != 2 || g.dim() != 2) throw std::invalid_argument("latent batches must be [N, D]");
  if (c.size(0) != g.size(0)) throw std::invalid_argument("latent batches are not paired");
  if (c.size(0) == 0) throw std::invalid_argument("empty latent batch");
  if (c.size(1) != approx->options().target_dim ||
      g.size(1) != approx->options().condition_dim)
    throw std::invalid_argument("latent dimensions do not match the approximation");
}

}  // namespace

torch::Tensor LogQ(const torch::Tensor &c, const torch::Tensor &g, VariationalApprox &approx) {
  CheckPairs(c, g, approx);
  auto q = approx(g);
  auto quad = (c - q.mean).pow(2) * torch::exp(-q.logvar);
  return -0.5 * (quad + q.logvar + kLog2Pi).sum(-1);
}

torch::Tensor PairwiseLogQ(const torch::Tensor &c, const torch::Tensor &g,
                           VariationalApprox &approx) {
  CheckPairs(c, g, approx);
  auto q = approx(g);
  auto mean = q.mean.unsqueeze(1);              // [N_g, 1, D]
  auto logvar = q.logvar.unsqueeze(1);          // [N_g, 1, D]
  auto quad = (c.unsqueeze(0) - mean).pow(2) * torch::exp(-logvar);  // [N_g, N_c, D]
  return -0.5 * (quad + logvar + kLog2Pi).sum(-1);
}

torch::Tensor VclubEstimate(const torch::Tensor &c, const torch::Tensor &g,
                            VariationalApprox &approx) {
  auto table = PairwiseLogQ(c, g, approx);
  return table.diagonal().mean() - table.mean();
}

torch::Tensor LogLikelihood(const torch::Tensor &c, const torch::Tensor &g,
                            VariationalApprox &approx) {
  return LogQ(c, g, approx).mean();
}

double ProbeVclub(const torch::Tensor &c, const torch::Tensor &g,
                  const VclubProbeOptions &opts) {
  // Seed the probe without disturbing the caller's default generator.
  auto default_gen = at::detail::getDefaultCPUGenerator();
  const auto saved_state = default_gen.get_state();
  torch::manual_seed(opts.seed);
  auto cd = c.detach().to(torch::kFloat32);
  auto gd = g.detach().to(torch::kFloat32);
  // Standardise both sides so that the probe is insensitive to latent scale.
  auto standardise = [](const torch::Tensor &x) {
    return (x - x.mean(0, true)) / (x.std(0, /*unbiased=*/false, true) + 1e-6);
  };
  cd = standardise(cd);
  gd = standardise(gd);
  VariationalApproxOptions vo;
  vo.condition_dim = gd.size(1);
  vo.target_dim = cd.size(1);
  vo.hidden = opts.hidden;
  VariationalApprox approx(vo);
  torch::optim::Adam optim(approx->parameters(), torch::optim::AdamOptions(opts.learning_rate));
  for (int s = 0; s < opts.steps; ++s) {
    optim.zero_grad();
    auto loss = -LogLikelihood(cd, gd, approx);
    loss.backward();
    optim.step();
  }
  torch::NoGradGuard no_grad;
  const double estimate = VclubEstimate(cd, gd, approx).item<double>();
  default_gen.set_state(saved_state);
  return estimate;
}

}  // namespace sdrtse
