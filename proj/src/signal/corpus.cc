// signal/corpus.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sdrtse/corpus.h"

namespace sdrtse {

namespace fs = std::filesystem;

namespace {

struct Vowel {
  double f1, f2, f3;
};

// Shared vowel inventory; content is speaker independent.
constexpr std::array<Vowel, 7> kVowels = {{{730, 1090, 2440},
                                           {270, 2290, 3010},
                                           {300, 870, 2240},
                                           {530, 1840, 2480},
                                           {570, 840, 2410},
                                           {660, 1720, 2410},
                                           {440, 1020, 2240}}};
constexpr std::array<double, 3> kBandwidths = {90.0, 110.0, 160.0};
constexpr std::array<double, 3> kFormantGains = {1.0, 0.6, 0.3};
constexpr double kMinF0 = 95.0;
constexpr double kMaxF0 = 280.0;
constexpr float kPeak = 0.25f;

double Uniform(std::mt19937_64 &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

uint64_t MixSeed(uint64_t seed, uint64_t salt) {
  // splitmix64 finaliser
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double FormantEnvelope(double f, const Vowel &v, double scale, double bw_scale) {
  const std::array<double, 3> centres = {v.f1 * scale, v.f2 * scale, v.f3 * scale};
  double e = 0.0;
  for (size_t i = 0; i < centres.size(); ++i) {
    const double d = (f - centres[i]) / (kBandwidths[i] * bw_scale);
    e += kFormantGains[i] / (1.0 + d * d);
  }
  return e;
}

std::string UtteranceName(int speaker, int utt) {
  std::ostringstream os;
  os << "utt_spk" << std::setw(2) << std::setfill('0') << speaker << "_"
     << std::setw(3) << utt << ".wav";
  return os.str();
}

std::string SpeakerId(int speaker) {
  std::ostringstream os;
  os << "spk" << std::setw(2) << std::setfill('0') << speaker;
  return os.str();
}

}  // namespace

void CorpusConfig::Check() const {
  if (speakers < 2) throw std::invalid_argument("corpus needs at least 2 speakers");
  if (utterances_per_speaker < 4)
    throw std::invalid_argument("corpus needs at least 4 utterances per speaker");
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
  if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
  if (snr_low_db > snr_high_db) throw std::invalid_argument("empty SNR range");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  if (mixtures_per_utterance < 1)
    throw std::invalid_argument("mixtures_per_utterance must be positive");
}

SyntheticVoice DrawVoice(uint64_t seed, int index, int num_speakers) {
  if (num_speakers < 1 || index < 0 || index >= num_speakers)
    throw std::invalid_argument("speaker index out of range");
  // Formant scale levels are assigned through a seeded permutation so that
  // pitch and vocal tract size are not tied to each other.
  std::vector<int> levels(num_speakers);
  for (int i = 0; i < num_speakers; ++i) levels[i] = i;
  std::mt19937_64 perm_rng(MixSeed(seed, 0xf0f0));
  std::shuffle(levels.begin(), levels.end(), perm_rng);

  std::mt19937_64 rng(MixSeed(seed, 1000 + index));
  const double pos = num_speakers > 1 ? static_cast<double>(index) / (num_speakers - 1) : 0.5;
  const double level =
      num_speakers > 1 ? static_cast<double>(levels[index]) / (num_speakers - 1) : 0.5;
  SyntheticVoice v;
  v.f0_hz = kMinF0 * std::pow(kMaxF0 / kMinF0, pos) * Uniform(rng, 0.98, 1.02);
  v.formant_scale = 0.84 + 0.34 * level;
  v.bandwidth_scale = Uniform(rng, 0.8, 1.3);
  v.tilt_db_per_octave = Uniform(rng, -9.0, -4.0);
  return v;
}

SyntheticUtterance SynthesizeUtterance(const SyntheticVoice &voice,
                                       std::mt19937_64 &rng,
                                       int64_t num_samples, int sample_rate) {
  if (num_samples <= 0) throw std::invalid_argument("utterance length must be positive");
  const double sr = sample_rate;
  // Per-utterance paralinguistic variation.
  const double rate = Uniform(rng, 0.8, 1.25);
  const double pitch_shift = Uniform(rng, 0.95, 1.05);
  const double formant_jitter = Uniform(rng, 0.98, 1.02);
  const double intonation_period = Uniform(rng, 0.6, 1.4);
  const double intonation_phase = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double declination = Uniform(rng, 0.0, 0.1);

  std::vector<double> f0(num_samples), amp(num_samples, 0.0);
  std::vector<int> vowel(num_samples, 0);
  const double duration = num_samples / sr;
  for (int64_t t = 0; t < num_samples; ++t) {
    const double time = t / sr;
    f0[t] = voice.f0_hz * pitch_shift *
            (1.0 + 0.06 * std::sin(2.0 * std::numbers::pi * time / intonation_period +
                                   intonation_phase)) *
            (1.0 - declination * time / duration);
  }

  // Syllable layout: silence gap, then a vowel with raised-cosine edges.
  int syllables = 0;
  int64_t t = 0;
  while (t < num_samples) {
    t += static_cast<int64_t>(Uniform(rng, 0.04, 0.16) / rate * sr);
    const auto len = static_cast<int64_t>(Uniform(rng, 0.12, 0.28) / rate * sr);
    const int v = std::uniform_int_distribution<int>(0, kVowels.size() - 1)(rng);
    const double gain = Uniform(rng, 0.6, 1.0);
    const auto edge = static_cast<int64_t>(0.02 * sr);
    for (int64_t i = 0; i < len && t + i < num_samples; ++i) {
      double w = 1.0;
      if (i < edge) w = 0.5 - 0.5 * std::cos(std::numbers::pi * i / edge);
      if (len - i <= edge) w = std::min(w, 0.5 - 0.5 * std::cos(std::numbers::pi * (len - i) / edge));
      amp[t + i] = gain * w;
      vowel[t + i] = v;
    }
    if (t < num_samples) ++syllables;
    t += len;
  }

  const double scale = voice.formant_scale * formant_jitter;
  const double tilt_exp = voice.tilt_db_per_octave / 6.0206;
  std::vector<double> out(num_samples, 0.0);
  std::vector<double> phases(64);
  for (auto &p : phases) p = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
  double base_phase = 0.0;
  std::normal_distribution<double> noise(0.0, 1.0);
  constexpr int64_t kBlock = 16;
  std::vector<double> harmonic_amp(phases.size());
  double f0_sum = 0.0;
  int64_t voiced = 0;
  for (int64_t b = 0; b < num_samples; b += kBlock) {
    const int64_t end = std::min(num_samples, b + kBlock);
    const double f0_block = f0[b];
    const int harmonics = std::min<int>(phases.size(), static_cast<int>(0.95 * sr / 2 / f0_block));
    for (int k = 1; k <= harmonics; ++k)
      harmonic_amp[k - 1] = std::pow(k, tilt_exp) *
                            FormantEnvelope(k * f0_block, kVowels[vowel[b]], scale,
                                            voice.bandwidth_scale);
    for (int64_t i = b; i < end; ++i) {
      base_phase += 2.0 * std::numbers::pi * f0[i] / sr;
      if (amp[i] <= 0.0) continue;
      double s = 0.0;
      for (int k = 1; k <= harmonics; ++k)
        s += harmonic_amp[k - 1] * std::sin(k * base_phase + phases[k - 1]);
      out[i] = amp[i] * (s + 0.02 * noise(rng));
      f0_sum += f0[i];
      ++voiced;
    }
  }

  double peak = 0.0;
  for (double x : out) peak = std::max(peak, std::abs(x));
  std::vector<float> samples(num_samples);
  const double norm = peak > 0.0 ? kPeak / peak : 0.0;
  for (int64_t i = 0; i < num_samples; ++i) samples[i] = static_cast<float>(out[i] * norm);

  SyntheticUtterance utt;
  utt.wave = Waveform(std::move(samples), sample_rate);
  utt.params.mean_f0_hz = voiced > 0 ? f0_sum / voiced : voice.f0_hz;
  utt.params.formant_scale = scale;
  utt.params.rate = rate;
  utt.params.syllables = syllables;
  return utt;
}

CorpusSummary SynthCorpus(const CorpusConfig &config, const fs::path &out_dir) {
  config.Check();
  std::error_code ec;
  if (fs::exists(out_dir, ec) && !fs::is_empty(out_dir, ec))
    throw std::runtime_error("output directory " + out_dir.string() + " is not empty");
  fs::create_directories(out_dir / "wav", ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  const auto num_samples =
      static_cast<int64_t>(std::llround(config.duration_s * config.sample_rate));
  const int per_speaker = config.utterances_per_speaker;
  const int n_test = std::max(
      2, static_cast<int>(std::lround(config.test_fraction * per_speaker)));
  if (per_speaker - n_test < 2)
    throw std::invalid_argument("too few utterances left for the training split");

  struct Utt {
    int speaker;
    fs::path rel;
    Waveform wave;
    UtteranceParams params;
    bool test;
  };
  std::vector<Utt> utts;
  std::ofstream params_out(out_dir / "utterances.tsv");
  params_out << "path\tspeaker_id\tsplit\tmean_f0_hz\tformant_scale\trate\tsyllables\n";
  for (int s = 0; s < config.speakers; ++s) {
    const SyntheticVoice voice = DrawVoice(config.seed, s, config.speakers);
    std::mt19937_64 rng(MixSeed(config.seed, 5000 + s));
    for (int u = 0; u < per_speaker; ++u) {
      auto synth = SynthesizeUtterance(voice, rng, num_samples, config.sample_rate);
      fs::path rel = fs::path("wav") / UtteranceName(s, u);
      WriteWav(out_dir / rel, synth.wave);
      const bool test = u >= per_speaker - n_test;
      params_out << rel.string() << '\t' << SpeakerId(s) << '\t'
                 << (test ? "test" : "train") << '\t' << synth.params.mean_f0_hz
                 << '\t' << synth.params.formant_scale << '\t' << synth.params.rate
                 << '\t' << synth.params.syllables << '\n';
      // Reload so that mixtures are built from the quantised samples on disk.
      utts.push_back({s, rel, ReadWav(out_dir / rel), synth.params, test});
    }
  }
  if (!params_out) throw std::runtime_error("failed to write utterances.tsv");

  CorpusSummary summary;
  summary.num_utterances = static_cast<int>(utts.size());
  std::mt19937_64 rng(MixSeed(config.seed, 9999));
  for (const bool test : {false, true}) {
    const std::string split = test ? "test" : "train";
    std::vector<size_t> pool;
    for (size_t i = 0; i < utts.size(); ++i)
      if (utts[i].test == test) pool.push_back(i);
    int counter = 0;
    for (size_t ti : pool) {
      std::vector<size_t> same, other;
      for (size_t j : pool) {
        if (j == ti) continue;
        (utts[j].speaker == utts[ti].speaker ? same : other).push_back(j);
      }
      for (int m = 0; m < config.mixtures_per_utterance; ++m) {
        const size_t ri = same[std::uniform_int_distribution<size_t>(0, same.size() - 1)(rng)];
        const size_t vi = other[std::uniform_int_distribution<size_t>(0, other.size() - 1)(rng)];
        const double snr = Uniform(rng, config.snr_low_db, config.snr_high_db);
        Waveform y = Mix(utts[ti].wave, utts[vi].wave, snr);
        std::ostringstream name;
        name << "mix_" << split << "_" << std::setw(4) << std::setfill('0') << counter++
             << ".wav";
        fs::path rel = fs::path("wav") / name.str();
        WriteWav(out_dir / rel, y);
        summary.manifest.push_back({out_dir / rel, out_dir / utts[ti].rel,
                                    out_dir / utts[ri].rel, SpeakerId(utts[ti].speaker),
                                    split});
      }
    }
    (test ? summary.num_test : summary.num_train) = counter;
  }
  summary.manifest_path = out_dir / "manifest.tsv";
  WriteManifest(summary.manifest_path, summary.manifest);
  return summary;
}

}  // namespace sdrtse
