// signal/wav_io.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sdrtse/signal.h"

namespace sdrtse {

namespace {

void PutU32(std::ostream &os, uint32_t v) {
  std::array<char, 4> b = {static_cast<char>(v & 0xff),
                           static_cast<char>((v >> 8) & 0xff),
                           static_cast<char>((v >> 16) & 0xff),
                           static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

void PutU16(std::ostream &os, uint16_t v) {
  std::array<char, 2> b = {static_cast<char>(v & 0xff),
                           static_cast<char>((v >> 8) & 0xff)};
  os.write(b.data(), 2);
}

uint32_t GetU32(const unsigned char *p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t GetU16(const unsigned char *p) { return p[0] | (p[1] << 8); }

}  // namespace

torch::Tensor Waveform::ToTensor() const {
  return torch::from_blob(const_cast<float *>(samples.data()),
                          {static_cast<int64_t>(samples.size())},
                          torch::kFloat32)
      .clone();
}

Waveform Waveform::FromTensor(const torch::Tensor &t, int sample_rate) {
  auto c = t.detach().to(torch::kFloat32).contiguous().view({-1});
  std::vector<float> s(c.data_ptr<float>(), c.data_ptr<float>() + c.numel());
  return Waveform(std::move(s), sample_rate);
}

void Waveform::Check() const {
  if (samples.empty()) throw std::invalid_argument("waveform is empty");
  if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
  for (float x : samples)
    if (!std::isfinite(x)) throw std::invalid_argument("waveform has non-finite samples");
}

Waveform ReadWav(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error(path.string() + ": not a RIFF/WAVE file");

  int sample_rate = 0, channels = 0, bits = 0, format = 0;
  const unsigned char *pcm = nullptr;
  size_t pcm_bytes = 0;
  size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char *chunk = data.data() + pos;
    uint32_t len = GetU32(chunk + 4);
    size_t body = pos + 8;
    if (body + len > data.size()) len = static_cast<uint32_t>(data.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0 && len >= 16) {
      format = GetU16(chunk + 8);
      channels = GetU16(chunk + 10);
      sample_rate = static_cast<int>(GetU32(chunk + 12));
      bits = GetU16(chunk + 22);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = chunk + 8;
      pcm_bytes = len;
    }
    pos = body + len + (len & 1);
  }
  if (format != 1 || channels != 1 || bits != 16)
    throw std::runtime_error(path.string() + ": only PCM 16-bit mono is supported");
  if (pcm == nullptr) throw std::runtime_error(path.string() + ": missing data chunk");

  std::vector<float> samples(pcm_bytes / 2);
  for (size_t i = 0; i < samples.size(); ++i) {
    auto v = static_cast<int16_t>(GetU16(pcm + 2 * i));
    samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return Waveform(std::move(samples), sample_rate);
}

void WriteWav(const std::filesystem::path &path, const Waveform &wave) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  const auto n = static_cast<uint32_t>(wave.samples.size());
  os.write("RIFF", 4);
  PutU32(os, 36 + 2 * n);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  PutU32(os, 16);
  PutU16(os, 1);
  PutU16(os, 1);
  PutU32(os, static_cast<uint32_t>(wave.sample_rate));
  PutU32(os, static_cast<uint32_t>(wave.sample_rate) * 2);
  PutU16(os, 2);
  PutU16(os, 16);
  os.write("data", 4);
  PutU32(os, 2 * n);
  for (float x : wave.samples) {
    float c = std::clamp(x, -1.0f, 32767.0f / 32768.0f);
    auto v = static_cast<int16_t>(std::lround(c * 32768.0f));
    PutU16(os, static_cast<uint16_t>(v));
  }
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace sdrtse
