// tests/test_util.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef SDRTSE_TESTS_TEST_UTIL_H_
#define SDRTSE_TESTS_TEST_UTIL_H_

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sdrtse/config.h"

namespace sdrtse::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("sdrtse_" + tag + "_" + std::to_string(rng() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline std::string Slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Worst relative error ||analytic - numeric|| / ||numeric|| over the given
// parameters, using central differences on up to `samples` random
// coordinates of each. `loss` must be deterministic and return a scalar.
inline double GradientRelativeError(const std::function<torch::Tensor()> &loss,
                                    std::vector<torch::Tensor> params, int samples = 12,
                                    double h = 1e-6, uint64_t seed = 1) {
  for (auto &p : params)
    if (p.grad().defined()) p.mutable_grad().zero_();
  loss().backward();
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (auto &p : params) {
    auto grad = p.grad().defined() ? p.grad().clone() : torch::zeros_like(p);
    auto flat = p.detach().view({-1});
    auto gflat = grad.view({-1});
    const int64_t n = flat.numel();
    std::vector<double> analytic, numeric;
    for (int s = 0; s < std::min<int64_t>(samples, n); ++s) {
      const int64_t i = samples >= n ? s : static_cast<int64_t>(rng() % n);
      const double orig = flat[i].item<double>();
      double plus, minus;
      {
        torch::NoGradGuard ng;
        flat[i] = orig + h;
        plus = loss().item<double>();
        flat[i] = orig - h;
        minus = loss().item<double>();
        flat[i] = orig;
      }
      numeric.push_back((plus - minus) / (2 * h));
      analytic.push_back(gflat[i].item<double>());
    }
    double diff = 0.0, norm = 0.0;
    for (size_t k = 0; k < numeric.size(); ++k) {
      diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
      norm += numeric[k] * numeric[k];
    }
    // Parameters with vanishing gradient (e.g. a key bias under softmax) are
    // compared absolutely; their numeric estimate is pure rounding noise.
    const double err = std::sqrt(diff) / std::max(std::sqrt(norm), 1e-3);
    worst = std::max(worst, err);
  }
  return worst;
}

// Tiny architecture for fast tests: every latent width is at most 8.
inline RunConfig MicroConfig() {
  RunConfig c;
  c.stft = {64, 32, 64};
  c.corpus.speakers = 2;
  c.corpus.utterances_per_speaker = 4;
  c.corpus.duration_s = 0.5;
  c.rsen.global_dim = 8;
  c.rsen.semantic_dim = 8;
  c.rsen.channels = 8;
  c.rsen.blocks = 2;
  c.rsen.kernel = 3;
  c.rsen.downsample_blocks = 1;
  c.mi.hidden = 8;
  c.mi.layers = 2;
  c.gidn.reduction = 2;
  c.sen.feature_dim = 8;
  c.sen.kernel = 8;
  c.sen.stride = 4;
  c.sen.chunk = 10;
  c.sen.iterations = 1;
  c.sen.plain_layers = 1;
  c.sen.heads = 2;
  c.sen.ff_dim = 8;
  c.optim.batch_size = 2;
  c.optim.max_steps = 6;
  c.optim.eval_every = 3;
  c.optim.checkpoint_every = 3;
  c.Resolve();
  c.Check();
  return c;
}

}  // namespace sdrtse::testing

#endif  // SDRTSE_TESTS_TEST_UTIL_H_
