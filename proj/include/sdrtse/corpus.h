// sdrtse/corpus.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef SDRTSE_CORPUS_H_
#define SDRTSE_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sdrtse/signal.h"

namespace sdrtse {

// Synthetic two-speaker corpus. A "speaker" is a fixed voice: an F0 band plus
// a formant filter shape. Utterances of one speaker share the voice and vary
// in syllable content, speaking rate and intonation.
struct CorpusConfig {
  int speakers = 2;
  int utterances_per_speaker = 10;
  double duration_s = 2.0;
  int sample_rate = 8000;
  uint64_t seed = 7;
  double snr_low_db = -5.0;
  double snr_high_db = 5.0;
  // Share of each speaker's utterances held out for the test split (at least 2).
  double test_fraction = 0.25;
  int mixtures_per_utterance = 3;

  void Check() const;
};

struct SyntheticVoice {
  double f0_hz = 120.0;
  double formant_scale = 1.0;
  double bandwidth_scale = 1.0;
  // Spectral slope of the glottal source, in dB per octave (negative).
  double tilt_db_per_octave = -6.0;
};

// Generator parameters actually used for one utterance.
struct UtteranceParams {
  double mean_f0_hz = 0.0;
  double formant_scale = 0.0;
  double rate = 1.0;
  int syllables = 0;
};

struct SyntheticUtterance {
  Waveform wave;
  UtteranceParams params;
};

// Voice of speaker `index` out of `num_speakers`; a pure function of its arguments.
SyntheticVoice DrawVoice(uint64_t seed, int index, int num_speakers);

SyntheticUtterance SynthesizeUtterance(const SyntheticVoice &voice,
                                       std::mt19937_64 &rng,
                                       int64_t num_samples, int sample_rate);

struct ManifestEntry {
  std::filesystem::path mixture_path;
  std::filesystem::path target_path;
  std::filesystem::path reference_path;
  std::string speaker_id;
  std::string split;
};

using Manifest = std::vector<ManifestEntry>;

// Paths are stored relative to the manifest's directory and resolved on read.
void WriteManifest(const std::filesystem::path &path, const Manifest &manifest);
Manifest ReadManifest(const std::filesystem::path &path);
Manifest FilterSplit(const Manifest &manifest, const std::string &split);

struct CorpusSummary {
  Manifest manifest;
  std::filesystem::path manifest_path;
  int num_utterances = 0;
  // Triplets per split.
  int num_train = 0;
  int num_test = 0;
};

// Writes wav/ and manifest.tsv (plus utterances.tsv with generator parameters)
// under out_dir, which must be absent or empty.
CorpusSummary SynthCorpus(const CorpusConfig &config,
                          const std::filesystem::path &out_dir);

}  // namespace sdrtse

#endif  // SDRTSE_CORPUS_H_
