// metrics/si_snr.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <stdexcept>

#include "sdrtse/metrics.h"

namespace sdrtse {

namespace {

torch::Tensor ToDouble(std::span<const float> x) {
  return torch::from_blob(const_cast<float *>(x.data()), {static_cast<int64_t>(x.size())},
                          torch::kFloat32)
      .to(torch::kFloat64);
}

void CheckLengths(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw std::invalid_argument("signals differ in length");
  if (a.empty()) throw std::invalid_argument("empty signal");
}

}  // namespace

torch::Tensor SiSnr(const torch::Tensor &estimate, const torch::Tensor &reference) {
  if (estimate.sizes() != reference.sizes())
    throw std::invalid_argument("SI-SNR: estimate and reference shapes differ");
  auto ref_energy = reference.pow(2).sum(-1, /*keepdim=*/true);
  auto dot = (estimate * reference).sum(-1, /*keepdim=*/true);
  // The clamp only matters for a silent reference, which is masked below.
  auto target = dot / ref_energy.clamp_min(1e-30) * reference;
  auto error = estimate - target;
  auto ratio = target.pow(2).sum(-1) / error.pow(2).sum(-1).clamp_min(kSiSnrEps);
  auto db = 10.0 * torch::log10(ratio.clamp_min(std::pow(10.0, kSilentReferenceDb / 10.0)));
  return torch::where(ref_energy.squeeze(-1) > 0, db,
                      torch::full_like(db, kSilentReferenceDb));
}

double SiSnr(std::span<const float> estimate, std::span<const float> reference) {
  CheckLengths(estimate, reference);
  return SiSnr(ToDouble(estimate), ToDouble(reference)).item<double>();
}

double SiSnri(std::span<const float> estimate, std::span<const float> reference,
              std::span<const float> mixture) {
  CheckLengths(estimate, reference);
  CheckLengths(mixture, reference);
  return SiSnr(estimate, reference) - SiSnr(mixture, reference);
}

double Sdr(std::span<const float> estimate, std::span<const float> reference) {
  CheckLengths(estimate, reference);
  double signal = 0.0, distortion = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double r = reference[i], d = r - estimate[i];
    signal += r * r;
    distortion += d * d;
  }
  if (signal == 0.0) return kSilentReferenceDb;
  return 10.0 * std::log10(signal / std::max(distortion, kSiSnrEps));
}

double Sdri(std::span<const float> estimate, std::span<const float> reference,
            std::span<const float> mixture) {
  CheckLengths(mixture, reference);
  return Sdr(estimate, reference) - Sdr(mixture, reference);
}

}  // namespace sdrtse
