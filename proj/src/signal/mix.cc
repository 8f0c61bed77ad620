// signal/mix.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <stdexcept>

#include "sdrtse/signal.h"

namespace sdrtse {

namespace {

double Energy(std::span<const float> x) {
  double e = 0.0;
  for (float v : x) e += static_cast<double>(v) * v;
  return e;
}

}  // namespace

double InterfererGain(std::span<const float> u, std::span<const float> v,
                      double snr_db) {
  if (u.size() != v.size())
    throw std::invalid_argument("mix: target and interferer lengths differ");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("mix: SNR must be finite");
  const double eu = Energy(u), ev = Energy(v);
  if (ev == 0.0) return 0.0;
  if (eu == 0.0)
    throw std::invalid_argument("mix: SNR is undefined for a silent target");
  return std::sqrt(eu / (ev * std::pow(10.0, snr_db / 10.0)));
}

Waveform Mix(const Waveform &u, const Waveform &v, double snr_db) {
  if (u.sample_rate != v.sample_rate)
    throw std::invalid_argument("mix: sample rates differ");
  const double g = InterfererGain(u.view(), v.view(), snr_db);
  Waveform y = u;
  for (size_t i = 0; i < y.samples.size(); ++i)
    y.samples[i] = static_cast<float>(u.samples[i] + g * v.samples[i]);
  return y;
}

int64_t NumChunks(int64_t length, int64_t chunk, int64_t hop) {
  if (!(chunk >= hop && hop > 0))
    throw std::invalid_argument("chunking requires chunk >= hop > 0");
  if (length <= chunk) return 1;
  // ceil((T - L) / O + 1) in integer arithmetic
  return (length - chunk + hop - 1) / hop + 1;
}

int64_t MsToSamples(double ms, int sample_rate) {
  return static_cast<int64_t>(std::llround(ms * sample_rate / 1000.0));
}

std::vector<double> ChunkEnergies(std::span<const float> wave, int64_t chunk,
                                  int64_t hop) {
  const auto n = static_cast<int64_t>(wave.size());
  const int64_t m = NumChunks(n, chunk, hop);
  std::vector<double> energies(m, 0.0);
  for (int64_t k = 0; k < m; ++k) {
    const int64_t end = std::min(n, k * hop + chunk);
    for (int64_t t = k * hop; t < end; ++t)
      energies[k] += static_cast<double>(wave[t]) * wave[t];
  }
  return energies;
}

std::vector<double> ChunkEnergies(const Waveform &wave, double chunk_ms,
                                  double hop_ms) {
  return ChunkEnergies(wave.view(), MsToSamples(chunk_ms, wave.sample_rate),
                       MsToSamples(hop_ms, wave.sample_rate));
}

}  // namespace sdrtse
