// metrics/speaker_confusion.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <stdexcept>

#include "sdrtse/metrics.h"
#include "sdrtse/signal.h"

namespace sdrtse {

namespace {

// [M, chunk] zero-padded chunk matrix in double precision.
torch::Tensor ChunkMatrix(std::span<const float> x, int64_t chunks, int64_t chunk,
                          int64_t hop) {
  auto out = torch::zeros({chunks, chunk}, torch::kFloat64);
  auto acc = out.accessor<double, 2>();
  const auto n = static_cast<int64_t>(x.size());
  for (int64_t k = 0; k < chunks; ++k)
    for (int64_t t = 0; t < chunk && k * hop + t < n; ++t) acc[k][t] = x[k * hop + t];
  return out;
}

}  // namespace

void ScMetricConfig::Check() const {
  if (!(chunk_ms >= hop_ms && hop_ms > 0.0))
    throw std::invalid_argument("chunk length must be >= hop > 0");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
}

ConfusionResult SpeakerConfusionRatio(std::span<const float> estimate,
                                      std::span<const float> reference,
                                      std::span<const float> mixture, int sample_rate,
                                      const ScMetricConfig &config) {
  config.Check();
  if (estimate.size() != reference.size() || mixture.size() != reference.size())
    throw std::invalid_argument("speaker confusion: signals differ in length");
  if (reference.empty()) throw std::invalid_argument("speaker confusion: empty signal");
  const int64_t chunk = MsToSamples(config.chunk_ms, sample_rate);
  const int64_t hop = MsToSamples(config.hop_ms, sample_rate);
  const int64_t m = NumChunks(static_cast<int64_t>(reference.size()), chunk, hop);

  auto ref = ChunkMatrix(reference, m, chunk, hop);
  auto improvement = SiSnr(ChunkMatrix(estimate, m, chunk, hop), ref) -
                     SiSnr(ChunkMatrix(mixture, m, chunk, hop), ref);

  const auto ref_energy = ChunkEnergies(reference, chunk, hop);
  const auto est_energy = ChunkEnergies(estimate, chunk, hop);
  const double ref_gate = config.eta * *std::max_element(ref_energy.begin(), ref_energy.end());
  const double est_gate = config.eta * *std::max_element(est_energy.begin(), est_energy.end());

  ConfusionResult r;
  r.chunks_total = m;
  auto s = improvement.accessor<double, 1>();
  for (int64_t k = 0; k < m; ++k) {
    const bool valid = ref_energy[k] > ref_gate && est_energy[k] > est_gate;
    r.improvement.push_back(s[k]);
    r.valid.push_back(valid);
    if (valid) ++r.chunks_valid;
    if (s[k] < 0.0 && (valid || !config.strict)) ++r.chunks_sc;
  }
  if (r.chunks_valid > 0)
    r.r_scr = 100.0 * static_cast<double>(r.chunks_sc) / static_cast<double>(r.chunks_valid);
  return r;
}

UtteranceMetrics EvaluateUtterance(std::span<const float> estimate,
                                   std::span<const float> reference,
                                   std::span<const float> mixture, int sample_rate,
                                   const ScMetricConfig &config) {
  UtteranceMetrics u;
  u.si_snri_db = SiSnri(estimate, reference, mixture);
  u.sdri_db = Sdri(estimate, reference, mixture);
  auto sc = SpeakerConfusionRatio(estimate, reference, mixture, sample_rate, config);
  u.r_scr_pct = sc.r_scr;
  u.chunks_total = sc.chunks_total;
  u.chunks_sc = sc.chunks_sc;
  u.chunks_valid = sc.chunks_valid;
  return u;
}

}  // namespace sdrtse
