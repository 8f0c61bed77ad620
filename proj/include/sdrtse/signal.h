// sdrtse/signal.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef SDRTSE_SIGNAL_H_
#define SDRTSE_SIGNAL_H_

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace sdrtse {

// Mono waveform. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 8000;

  Waveform() = default;
  Waveform(std::vector<float> s, int sr) : samples(std::move(s)), sample_rate(sr) {}

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
  std::span<const float> view() const { return samples; }
  // 1-D float tensor sharing no storage with this waveform.
  torch::Tensor ToTensor() const;
  static Waveform FromTensor(const torch::Tensor &t, int sample_rate);
  // Throws if empty, non-finite or sample_rate <= 0.
  void Check() const;
};

struct StftParams {
  int win_length = 512;
  int hop_length = 128;
  int fft_size = 512;

  int NumBins() const { return fft_size / 2 + 1; }
  void Check() const;
  bool operator==(const StftParams &) const = default;
};

// Magnitude spectrogram, mag has shape [num_bins, num_frames].
struct Spectrogram {
  torch::Tensor mag;
  StftParams params;

  int64_t NumBins() const { return mag.size(0); }
  int64_t NumFrames() const { return mag.size(1); }
};

// 1 + ceil((length - win) / hop); the last frame is zero padded.
int64_t NumStftFrames(int64_t length, const StftParams &params);

// Hann-windowed magnitude STFT. Throws std::invalid_argument when the wave is
// shorter than one window.
Spectrogram StftMagnitude(const Waveform &wave, const StftParams &params);

// Batched form: waves [B, T] -> [B, F, T_X]; a 1-D input gives [F, T_X].
// Gradients are not tracked through this path.
torch::Tensor StftMagnitude(const torch::Tensor &waves, const StftParams &params);

// Gain g such that ||u||^2 / ||g v||^2 = 10^(snr_db / 10).
double InterfererGain(std::span<const float> u, std::span<const float> v,
                      double snr_db);

// u + g v with g from InterfererGain. A silent interferer returns u.
Waveform Mix(const Waveform &u, const Waveform &v, double snr_db);

// Number of analysis chunks ceil((T - L) / O + 1), at least 1.
int64_t NumChunks(int64_t length, int64_t chunk, int64_t hop);

int64_t MsToSamples(double ms, int sample_rate);

// Sum of squared samples for each chunk, last chunk zero padded.
std::vector<double> ChunkEnergies(std::span<const float> wave, int64_t chunk,
                                  int64_t hop);
std::vector<double> ChunkEnergies(const Waveform &wave, double chunk_ms,
                                  double hop_ms);

// PCM 16-bit mono RIFF/WAVE.
Waveform ReadWav(const std::filesystem::path &path);
void WriteWav(const std::filesystem::path &path, const Waveform &wave);

}  // namespace sdrtse

#endif  // SDRTSE_SIGNAL_H_
