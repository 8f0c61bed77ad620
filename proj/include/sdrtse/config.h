// sdrtse/config.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef SDRTSE_CONFIG_H_
#define SDRTSE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "sdrtse/corpus.h"
#include "sdrtse/gidn.h"
#include "sdrtse/metrics.h"
#include "sdrtse/mi.h"
#include "sdrtse/rsen.h"
#include "sdrtse/sen.h"
#include "sdrtse/signal.h"

namespace sdrtse {

struct LossWeights {
  double sisnr = 1.0;
  double rec = 1e-3;
  double kl = 1e-4;
  double mi = 1e-4;
  double ll = 1e-3;
  double sim = 1e-3;
};

struct OptimConfig {
  double lr = 1e-3;
  double lr_approx = 1e-3;
  double lr_sim = 1e-3;
  double clip_norm = 5.0;
  int batch_size = 8;
  int max_steps = 20000;
  // Approximation-network updates per joint update.
  int approx_steps = 1;
  int eval_every = 200;
  int checkpoint_every = 1000;
  // Evaluations without validation improvement before stopping.
  int patience = 10;
  // Random training crop of mixture/target in seconds; 0 keeps full length.
  double crop_s = 0.0;
  // Cap on validation mixtures per evaluation; 0 uses the whole split.
  int eval_limit = 0;
};

// Everything that drives a run, as one declarative document. Dependent sizes
// (spectrogram bins, attention width, guidance widths) are derived in Resolve().
struct RunConfig {
  uint64_t seed = 7;
  StftParams stft;
  CorpusConfig corpus;
  RsenOptions rsen;
  VariationalApproxOptions mi;
  GidnOptions gidn;
  SenOptions sen;
  LossWeights weights;
  OptimConfig optim;
  ScMetricConfig metric;

  void Resolve();
  void Check() const;

  nlohmann::json ToJson() const;
  // Unknown keys are rejected; missing keys keep their defaults.
  static RunConfig FromJson(const nlohmann::json &j);
  static RunConfig Load(const std::filesystem::path &path);

  // Hash of the sections that determine parameter shapes and the objective
  // (stft, rsen, mi, gidn, sen, weights). Independent of key order.
  std::string ModelHash() const;
};

// Sets a dotted key ("optim.max_steps") from its textual value, with the
// same validation as FromJson.
void SetConfigValue(nlohmann::json &config, const std::string &dotted_key,
                    const std::string &value);

// Stable 64-bit FNV-1a digest, hex encoded.
std::string Fnv1aHex(const std::string &data);

// Desk-scale configuration used by the acceptance experiment and examples.
RunConfig DeskScaleConfig();

}  // namespace sdrtse

#endif  // SDRTSE_CONFIG_H_
