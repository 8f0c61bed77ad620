// signal/stft.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <stdexcept>
#include <string>

#include "sdrtse/signal.h"

namespace sdrtse {

void StftParams::Check() const {
  if (!(hop_length > 0 && hop_length <= win_length && win_length <= fft_size))
    throw std::invalid_argument(
        "STFT parameters must satisfy 0 < hop <= win <= fft_size");
}

int64_t NumStftFrames(int64_t length, const StftParams &params) {
  params.Check();
  if (length < params.win_length)
    throw std::invalid_argument("signal of " + std::to_string(length) +
                                " samples is shorter than one STFT window (" +
                                std::to_string(params.win_length) + ")");
  const int64_t rest = length - params.win_length;
  return 1 + (rest + params.hop_length - 1) / params.hop_length;
}

torch::Tensor StftMagnitude(const torch::Tensor &waves, const StftParams &params) {
  torch::NoGradGuard no_grad;
  const bool single = waves.dim() == 1;
  auto x = single ? waves.unsqueeze(0) : waves;
  if (x.dim() != 2) throw std::invalid_argument("StftMagnitude expects [T] or [B, T]");
  const int64_t frames = NumStftFrames(x.size(1), params);
  const int64_t padded = (frames - 1) * params.hop_length + params.win_length;
  if (padded > x.size(1))
    x = torch::constant_pad_nd(x, {0, padded - x.size(1)});
  auto window = torch::hann_window(params.win_length, /*periodic=*/true,
                                   x.options().requires_grad(false));
  // [B, frames, win]
  auto framed = x.unfold(1, params.win_length, params.hop_length) * window;
  auto spec = torch::fft::rfft(framed, params.fft_size, -1).abs();
  auto mag = spec.transpose(1, 2).contiguous();
  return single ? mag.squeeze(0) : mag;
}

Spectrogram StftMagnitude(const Waveform &wave, const StftParams &params) {
  wave.Check();
  return Spectrogram{StftMagnitude(wave.ToTensor(), params), params};
}

}  // namespace sdrtse
