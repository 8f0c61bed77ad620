// sdrtse/metrics.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef SDRTSE_METRICS_H_
#define SDRTSE_METRICS_H_

#include <torch/torch.h>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sdrtse {

inline constexpr double kSiSnrEps = 1e-8;
// Returned for a silent reference, and the floor of every SI-SNR value.
inline constexpr double kSilentReferenceDb = -80.0;

// Scale-invariant SNR along the last axis, in dB:
//   s = (<est, ref> / ||ref||^2) ref,  e = est - s,
//   10 log10(||s||^2 / max(||e||^2, eps)), floored at -80 dB.
// Signals are used as given (no mean removal). Differentiable; this is also
// the training objective.
torch::Tensor SiSnr(const torch::Tensor &estimate, const torch::Tensor &reference);

double SiSnr(std::span<const float> estimate, std::span<const float> reference);
double SiSnri(std::span<const float> estimate, std::span<const float> reference,
              std::span<const float> mixture);

// Projection-free SDR: 10 log10(||ref||^2 / max(||ref - est||^2, eps)).
double Sdr(std::span<const float> estimate, std::span<const float> reference);
double Sdri(std::span<const float> estimate, std::span<const float> reference,
            std::span<const float> mixture);

struct ScMetricConfig {
  double chunk_ms = 250.0;
  double hop_ms = 125.0;
  // Fraction of each signal's maximum chunk energy a chunk must exceed.
  double eta = 0.05;
  // Count confused chunks among energy-valid chunks only.
  bool strict = false;

  void Check() const;
};

struct ConfusionResult {
  std::optional<double> r_scr;  // percent; empty when no chunk is valid
  int64_t chunks_total = 0;
  int64_t chunks_sc = 0;
  int64_t chunks_valid = 0;
  std::vector<double> improvement;  // S(k) in dB
  std::vector<bool> valid;
};

ConfusionResult SpeakerConfusionRatio(std::span<const float> estimate,
                                      std::span<const float> reference,
                                      std::span<const float> mixture, int sample_rate,
                                      const ScMetricConfig &config = {});

struct UtteranceMetrics {
  std::string id;
  std::string speaker_id;
  double si_snri_db = 0.0;
  double sdri_db = 0.0;
  std::optional<double> r_scr_pct;
  int64_t chunks_total = 0;
  int64_t chunks_sc = 0;
  int64_t chunks_valid = 0;
  // Filled only by an external perceptual-quality tool.
  std::optional<double> pesq;
};

UtteranceMetrics EvaluateUtterance(std::span<const float> estimate,
                                   std::span<const float> reference,
                                   std::span<const float> mixture, int sample_rate,
                                   const ScMetricConfig &config);

struct AggregateMetrics {
  size_t utterances = 0;
  double si_snri_db = 0.0;
  double sdri_db = 0.0;
  // Mean over utterances with a defined ratio.
  std::optional<double> r_scr_pct;
  // 100 * sum(chunks_sc) / sum(chunks_valid).
  std::optional<double> pooled_r_scr_pct;
  int64_t chunks_total = 0;
  int64_t chunks_sc = 0;
  int64_t chunks_valid = 0;
  std::optional<double> pesq;
};

struct EvalReport {
  std::string label;
  std::string config_hash;
  ScMetricConfig sc;
  std::vector<UtteranceMetrics> utterances;

  AggregateMetrics Aggregate() const;
};

// JSON lines: a header record, one record per utterance, an aggregate record.
void WriteEvalReport(const std::filesystem::path &path, const EvalReport &report);
EvalReport ReadEvalReport(const std::filesystem::path &path);

}  // namespace sdrtse

#endif  // SDRTSE_METRICS_H_
