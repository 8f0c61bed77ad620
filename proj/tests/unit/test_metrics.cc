// tests/unit/test_metrics.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sdrtse/metrics.h"
#include "test_util.h"

using namespace sdrtse;

namespace {

std::vector<float> Noise(size_t n, uint64_t seed, float scale = 0.3f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0, scale);
  std::vector<float> x(n);
  for (auto &v : x) v = d(rng);
  return x;
}

std::vector<float> Tone(size_t n, double hz, double amp, int sr = 8000) {
  std::vector<float> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = static_cast<float>(amp * std::sin(2 * std::numbers::pi * hz * i / sr));
  return x;
}

std::vector<float> Add(const std::vector<float> &a, const std::vector<float> &b) {
  std::vector<float> y(a.size());
  for (size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
  return y;
}

// Plain-loop SI-SNR with the same conventions as the library.
double SiSnrOracle(const std::vector<double> &est, const std::vector<double> &ref) {
  double rr = 0, er = 0;
  for (size_t i = 0; i < ref.size(); ++i) {
    rr += ref[i] * ref[i];
    er += est[i] * ref[i];
  }
  if (rr == 0) return -80.0;
  double ss = 0, ee = 0;
  for (size_t i = 0; i < ref.size(); ++i) {
    const double s = er / rr * ref[i], e = est[i] - s;
    ss += s * s;
    ee += e * e;
  }
  return std::max(-80.0, 10 * std::log10(ss / std::max(ee, 1e-8)));
}

// Chunk-wise confusion ratio computed from scratch.
double ConfusionOracle(const std::vector<float> &est, const std::vector<float> &ref,
                       const std::vector<float> &mix, int64_t l, int64_t o, double eta) {
  const int64_t t = static_cast<int64_t>(ref.size());
  int64_t m = 1;
  while ((m - 1) * o + l < t) ++m;
  auto chunk = [&](const std::vector<float> &x, int64_t k) {
    std::vector<double> c(l, 0.0);
    for (int64_t i = 0; i < l && k * o + i < t; ++i) c[i] = x[k * o + i];
    return c;
  };
  auto energy = [](const std::vector<double> &c) {
    double e = 0;
    for (double v : c) e += v * v;
    return e;
  };
  double ref_max = 0, est_max = 0;
  for (int64_t k = 0; k < m; ++k) {
    ref_max = std::max(ref_max, energy(chunk(ref, k)));
    est_max = std::max(est_max, energy(chunk(est, k)));
  }
  int64_t sc = 0, valid = 0;
  for (int64_t k = 0; k < m; ++k) {
    auto r = chunk(ref, k), e = chunk(est, k), y = chunk(mix, k);
    const bool ok = energy(r) > eta * ref_max && energy(e) > eta * est_max;
    valid += ok;
    if (SiSnrOracle(e, r) - SiSnrOracle(y, r) < 0) ++sc;
  }
  return 100.0 * sc / valid;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("si-snr closed forms") {
    std::vector<float> est{1, 1}, ref{1, 0};
    CHECK(std::abs(SiSnr(est, ref)) < 1e-9);
    auto x = Noise(4000, 1);
    CHECK(SiSnr(x, x) >= 60.0);
    std::vector<float> silent(4000, 0.0f);
    CHECK(SiSnr(x, silent) == -80.0);
    CHECK_THROWS_AS(SiSnr(std::vector<float>{1, 2}, std::vector<float>{1}), std::invalid_argument);
  }

  TEST_CASE("si-snr is invariant to scaling the estimate") {
    auto ref = Noise(2000, 2), noise = Noise(2000, 3, 0.1f);
    auto est = Add(ref, noise);
    const double base = SiSnr(est, ref);
    for (float a : {0.01f, 0.5f, 3.0f, 100.0f}) {
      std::vector<float> scaled(est);
      for (auto &v : scaled) v *= a;
      CHECK(std::abs(SiSnr(scaled, ref) - base) <= 1e-6);
    }
  }

  TEST_CASE("si-snr matches a loop oracle and the tensor path") {
    auto ref = Noise(1000, 4), est = Add(Noise(1000, 5, 0.2f), ref);
    std::vector<double> r(ref.begin(), ref.end()), e(est.begin(), est.end());
    CHECK(SiSnr(est, ref) == doctest::Approx(SiSnrOracle(e, r)).epsilon(1e-9));
    auto te = torch::tensor(e, torch::kFloat64), tr = torch::tensor(r, torch::kFloat64);
    auto batch = SiSnr(torch::stack({te, tr}), torch::stack({tr, tr}));
    CHECK(batch[0].item<double>() == doctest::Approx(SiSnrOracle(e, r)).epsilon(1e-9));
    CHECK(batch[1].item<double>() >= 60.0);
  }

  TEST_CASE("si-snr gradient is finite and matches finite differences") {
    auto ref = torch::randn({2, 300}, torch::kFloat64);
    auto est = (ref + 0.3 * torch::randn({2, 300}, torch::kFloat64)).requires_grad_();
    CHECK(testing::GradientRelativeError([&] { return SiSnr(est, ref).sum(); }, {est}, 20) < 1e-5);
    auto silent = torch::zeros({1, 50}, torch::kFloat64);
    auto e2 = torch::randn({1, 50}, torch::kFloat64).requires_grad_();
    SiSnr(e2, silent).sum().backward();
    CHECK(torch::isfinite(e2.grad()).all().item<bool>());
  }

  TEST_CASE("improvements") {
    auto ref = Noise(3000, 6), itf = Noise(3000, 7);
    auto mix = Add(ref, itf);
    CHECK(SiSnri(mix, ref, mix) == 0.0);
    std::vector<float> half(ref);
    for (auto &v : half) v *= 0.5f;
    CHECK(Sdr(half, ref) == doctest::Approx(20 * std::log10(2.0)).epsilon(1e-6));
    CHECK(Sdr(half, ref) == doctest::Approx(6.0206).epsilon(1e-4));
    CHECK(SiSnri(ref, ref, mix) > 50.0);
    CHECK(Sdri(mix, ref, mix) == 0.0);
  }

  TEST_CASE("confusion ratio is zero for the clean target and for the mixture") {
    const int sr = 8000;
    auto ref = Tone(16000, 220, 0.5), itf = Tone(16000, 710, 0.4);
    auto mix = Add(ref, itf);
    auto r = SpeakerConfusionRatio(ref, ref, mix, sr);
    REQUIRE(r.r_scr.has_value());
    CHECK(*r.r_scr == 0.0);
    CHECK(r.chunks_total == 15);
    auto m = SpeakerConfusionRatio(mix, ref, mix, sr);
    CHECK(*m.r_scr == 0.0);
    for (double s : m.improvement) CHECK(s == 0.0);
  }

  TEST_CASE("confusion ratio flags an extracted interferer") {
    const int sr = 8000;
    auto ref = Add(Tone(16000, 180, 0.4), Noise(16000, 8, 0.05f));
    auto itf = Add(Tone(16000, 650, 0.4), Noise(16000, 9, 0.05f));
    auto mix = Add(ref, itf);
    auto r = SpeakerConfusionRatio(itf, ref, mix, sr);
    REQUIRE(r.r_scr.has_value());
    CHECK(*r.r_scr >= 90.0);
    CHECK(*r.r_scr == doctest::Approx(ConfusionOracle(itf, ref, mix, 2000, 1000, 0.05)));
  }

  TEST_CASE("confusion ratio matches the oracle on noisy estimates") {
    const int sr = 8000;
    for (uint64_t seed = 10; seed < 16; ++seed) {
      auto ref = Noise(12345, seed), itf = Noise(12345, seed + 100);
      auto mix = Add(ref, itf);
      std::vector<float> est(mix.size());
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<float> u(0, 1);
      for (size_t i = 0; i < est.size(); ++i) {
        const float a = (i / 3000) % 2 ? 0.9f : 0.1f;  // alternate between the two talkers
        est[i] = a * ref[i] + (1 - a) * itf[i] + 0.01f * u(rng);
      }
      for (bool strict : {false, true}) {
        ScMetricConfig cfg;
        cfg.strict = strict;
        auto r = SpeakerConfusionRatio(est, ref, mix, sr, cfg);
        CHECK(r.chunks_valid <= r.chunks_total);
        if (!strict) CHECK(*r.r_scr == doctest::Approx(ConfusionOracle(est, ref, mix, 2000, 1000, 0.05)));
        else CHECK(*r.r_scr <= 100.0);
      }
    }
  }

  TEST_CASE("no valid chunk leaves the ratio undefined") {
    auto ref = Noise(8000, 20);
    std::vector<float> zero(8000, 0.0f);
    auto r = SpeakerConfusionRatio(zero, ref, ref, 8000);
    CHECK(r.chunks_valid == 0);
    CHECK(!r.r_scr.has_value());
    auto u = EvaluateUtterance(zero, ref, ref, 8000, {});
    CHECK(!u.r_scr_pct.has_value());
  }

  TEST_CASE("strict mode ignores confused chunks outside the energy gate") {
    // Loud target in the first half only; the estimate is silent-ish noise later.
    std::vector<float> ref(16000, 0.0f), itf = Noise(16000, 21, 0.3f);
    auto loud = Tone(8000, 300, 0.6);
    std::copy(loud.begin(), loud.end(), ref.begin());
    auto mix = Add(ref, itf);
    std::vector<float> est(ref);
    for (size_t i = 8000; i < est.size(); ++i) est[i] = itf[i];
    ScMetricConfig lax, strict;
    strict.strict = true;
    auto a = SpeakerConfusionRatio(est, ref, mix, 8000, lax);
    auto b = SpeakerConfusionRatio(est, ref, mix, 8000, strict);
    CHECK(a.chunks_valid == b.chunks_valid);
    CHECK(b.chunks_sc <= a.chunks_sc);
    CHECK(*b.r_scr <= *a.r_scr);
  }

  TEST_CASE("config checks") {
    ScMetricConfig c;
    c.eta = 0;
    CHECK_THROWS_AS(c.Check(), std::invalid_argument);
    c = {};
    c.hop_ms = 300;
    CHECK_THROWS_AS(c.Check(), std::invalid_argument);
  }

  TEST_CASE("eval report round trip and schema") {
    testing::TempDir dir("report");
    EvalReport rep;
    rep.label = "z_s";
    rep.config_hash = "abc123";
    for (int i = 0; i < 3; ++i) {
      UtteranceMetrics u;
      u.id = "u" + std::to_string(i);
      u.speaker_id = "spk" + std::to_string(i % 2);
      u.si_snri_db = 1.5 * i;
      u.sdri_db = i;
      if (i != 1) u.r_scr_pct = 10.0 * i;
      u.chunks_total = 15;
      u.chunks_valid = i == 1 ? 0 : 10;
      u.chunks_sc = i;
      rep.utterances.push_back(u);
    }
    auto agg = rep.Aggregate();
    CHECK(agg.utterances == 3);
    CHECK(agg.si_snri_db == doctest::Approx(1.5));
    CHECK(*agg.r_scr_pct == doctest::Approx(10.0));
    CHECK(*agg.pooled_r_scr_pct == doctest::Approx(100.0 * 3 / 20));
    CHECK(!agg.pesq.has_value());
    WriteEvalReport(dir / "e.jsonl", rep);
    auto back = ReadEvalReport(dir / "e.jsonl");
    CHECK(back.label == "z_s");
    CHECK(back.config_hash == "abc123");
    REQUIRE(back.utterances.size() == 3);
    CHECK(!back.utterances[1].r_scr_pct.has_value());
    CHECK(back.utterances[2].si_snri_db == 3.0);

    std::ifstream in(dir / "e.jsonl");
    std::string line;
    std::vector<nlohmann::json> recs;
    while (std::getline(in, line)) recs.push_back(nlohmann::json::parse(line));
    REQUIRE(recs.size() == 5);
    CHECK(recs.front()["record"] == "header");
    CHECK(recs.back()["record"] == "aggregate");
    for (const char *k : {"id", "speaker_id", "si_snri_db", "sdri_db", "r_scr_pct",
                          "chunks_total", "chunks_sc", "chunks_valid"})
      CHECK(recs[1].contains(k));
    CHECK(recs[2]["r_scr_pct"].is_null());
  }
}
