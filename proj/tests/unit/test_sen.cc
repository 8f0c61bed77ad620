// tests/unit/test_sen.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <random>
#include <regex>

#include "doctest.h"
#include "sdrtse/sen.h"
#include "test_util.h"

using namespace sdrtse;

namespace {

SenOptions Small(Guidance g = Guidance::kSpeaker, FusionMode f = FusionMode::kAmln) {
  SenOptions o;
  o.feature_dim = 8;
  o.kernel = 8;
  o.stride = 4;
  o.chunk = 10;
  o.iterations = 1;
  o.plain_layers = 1;
  o.heads = 2;
  o.ff_dim = 16;
  o.condition_dim = 6;
  o.context_dim = 5;
  o.guidance = g;
  o.fusion = f;
  return o;
}

SenGuidance RandomGuidance(const SenOptions &o, int64_t b, int64_t t_c = 3,
                           torch::Dtype dt = torch::kFloat32) {
  SenGuidance g;
  if (UsesVector(o.guidance)) g.vector = torch::randn({b, o.condition_dim}, dt);
  if (UsesSequence(o.guidance)) g.context = torch::randn({b, o.context_dim, t_c}, dt);
  return g;
}

}  // namespace

TEST_SUITE("sen") {
  TEST_CASE("segment and merge round trip") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
      const int64_t chunk = 2 * (1 + rng() % 30);
      const int64_t t = 1 + rng() % 300;
      auto x = torch::randn({2, 3, t}, torch::kFloat64);
      auto seg = Segment(x, chunk);
      CHECK(seg.chunks.size(2) == chunk);
      CHECK(seg.chunks.size(3) == NumSegments(t, chunk));
      CHECK((Merge(seg.chunks, t) - x).abs().max().item<double>() <= 1e-6);
    }
  }

  TEST_CASE("segment count and coverage") {
    CHECK(NumSegments(100, 40) == 5);
    CHECK(NumSegments(1, 40) == 1);
    auto ones = torch::ones({1, 1, 100});
    auto seg = Segment(ones, 40);
    CHECK(seg.chunks.size(3) == 5);
    CHECK(torch::equal(Merge(seg.chunks, 100), ones));
    // Interior frames sit in two chunks, the last hop in one.
    CHECK(seg.chunks.sum().item<double>() == 180.0);
    CHECK_THROWS_AS(NumSegments(10, 7), std::invalid_argument);
    CHECK_THROWS_AS(Merge(seg.chunks, 40), std::invalid_argument);
  }

  TEST_CASE("amln with identity modulation equals layer norm") {
    torch::manual_seed(2);
    Amln amln(8, 4);
    amln->to(torch::kFloat64);
    {
      torch::NoGradGuard ng;
      amln->gamma->weight.zero_();
      amln->beta->weight.zero_();
    }
    for (int trial = 0; trial < 100; ++trial) {
      auto x = torch::randn({3, 5, 8}, torch::kFloat64) * (1 + trial % 7);
      auto ref = torch::layer_norm(x, {8}, {}, {}, 1e-5);
      CHECK((amln(x, torch::randn({3, 4}, torch::kFloat64)) - ref).abs().max().item<double>() <=
            1e-6);
    }
  }

  TEST_CASE("amln of a constant input is the shift") {
    torch::manual_seed(3);
    Amln amln(6, 4);
    auto z = torch::randn({2, 4});
    auto out = amln(torch::full({2, 7, 6}, 3.0), z);
    auto beta = amln->beta(z).unsqueeze(1).expand({2, 7, 6});
    CHECK((out - beta).abs().max().item<double>() < 1e-6);
  }

  TEST_CASE("amln and attention gradients match finite differences") {
    torch::manual_seed(4);
    Amln amln(6, 3);
    amln->to(torch::kFloat64);
    auto x = torch::randn({2, 4, 6}, torch::kFloat64), z = torch::randn({2, 3}, torch::kFloat64);
    auto w = torch::randn({2, 4, 6}, torch::kFloat64);
    CHECK(testing::GradientRelativeError([&] { return (amln(x, z) * w).sum(); },
                                         amln->parameters(), 10) < 1e-4);
    MultiHeadAttention mha(6, 2, 5);
    mha->to(torch::kFloat64);
    auto kv = torch::randn({2, 3, 5}, torch::kFloat64);
    CHECK(testing::GradientRelativeError([&] { return (mha(x, kv) * w).sum(); },
                                         mha->parameters(), 10) < 1e-4);
    TransformerLayer layer(6, 2, 12, 3);
    layer->to(torch::kFloat64);
    CHECK(layer->adaptive());
    CHECK(testing::GradientRelativeError([&] { return (layer(x, z) * w).sum(); },
                                         layer->parameters(), 10) < 1e-4);
    CHECK_THROWS_AS(layer(x), std::invalid_argument);
  }

  TEST_CASE("positional table layout") {
    const int64_t h = 8, k = 6, s = 4;
    auto table = PositionalEncoding2d(h, k, s, torch::TensorOptions(torch::kFloat64));
    auto zero = torch::zeros({1, h, k, s}, torch::kFloat64);
    CHECK(torch::equal(AddPositionalEncoding2d(zero).squeeze(0), table));
    // Intra half depends on k only, inter half on s only.
    for (int64_t j = 1; j < s; ++j)
      CHECK(torch::equal(table.narrow(0, 0, h / 2).select(2, j),
                         table.narrow(0, 0, h / 2).select(2, 0)));
    for (int64_t j = 1; j < k; ++j)
      CHECK(torch::equal(table.narrow(0, h / 2, h / 2).select(1, j),
                         table.narrow(0, h / 2, h / 2).select(1, 0)));
    CHECK(!torch::equal(table.narrow(0, 0, h / 2).select(1, 1),
                        table.narrow(0, 0, h / 2).select(1, 0)));
    CHECK(table[0][0][0].item<double>() == 0.0);  // sin(0)
    CHECK(table[1][0][0].item<double>() == 1.0);  // cos(0)
    CHECK(table[0][3][0].item<double>() == doctest::Approx(std::sin(3.0)));
    CHECK(table.abs().max().item<double>() <= 1.0);
    CHECK_THROWS_AS(PositionalEncoding2d(7, 4, 2, torch::TensorOptions()), std::invalid_argument);
  }

  TEST_CASE("dual-path stack keeps the shape and listens to the guidance") {
    torch::manual_seed(5);
    auto o = Small();
    DualPathStack stack(o);
    auto x = torch::randn({2, 8, 10, 3});
    auto g1 = RandomGuidance(o, 2), g2 = RandomGuidance(o, 2);
    auto y1 = stack(x, g1);
    CHECK(y1.sizes() == x.sizes());
    CHECK((y1 - stack(x, g2)).abs().max().item<double>() > 1e-4);
    CHECK(torch::equal(y1, stack(x, g1)));
    CHECK_THROWS_AS(stack(x, SenGuidance{}), std::invalid_argument);
    SenGuidance wrong;
    wrong.vector = torch::randn({2, 5});
    CHECK_THROWS_AS(stack(x, wrong), std::invalid_argument);
  }

  TEST_CASE("every guidance and fusion combination runs") {
    torch::manual_seed(6);
    for (auto g : {Guidance::kSpeaker, Guidance::kGlobal, Guidance::kSemantic,
                   Guidance::kSemanticGlobal, Guidance::kSemanticSpeaker})
      for (auto f : {FusionMode::kAmln, FusionMode::kSummation, FusionMode::kConcatenation,
                     FusionMode::kCrossAttention}) {
        auto o = Small(g, f);
        if (UsesVector(g) && f == FusionMode::kCrossAttention) {
          CHECK_THROWS_AS(o.Check(), std::invalid_argument);
          continue;
        }
        Extractor ex(o);
        auto y = ex(torch::randn({2, 200}), RandomGuidance(o, 2));
        CHECK(y.sizes() == torch::IntArrayRef({2, 200}));
        CHECK(torch::isfinite(y).all().item<bool>());
      }
  }

  TEST_CASE("guidance names round trip") {
    for (std::string n : {"z_s", "z_g", "z_c", "z_c+z_g", "z_c+z_s"})
      CHECK(ToString(ParseGuidance(n)) == n);
    for (std::string n : {"amln", "summation", "concatenation", "cross_attention"})
      CHECK(ToString(ParseFusionMode(n)) == n);
    CHECK_THROWS_AS(ParseGuidance("z_x"), std::invalid_argument);
    CHECK_THROWS_AS(ParseFusionMode("film"), std::invalid_argument);
  }

  TEST_CASE("summation with a zero projection is the identity") {
    torch::manual_seed(7);
    VectorFusion sum(FusionMode::kSummation, 8, 6);
    {
      torch::NoGradGuard ng;
      for (auto &p : sum->parameters()) p.zero_();
    }
    auto chunks = torch::randn({2, 8, 10, 3});
    CHECK(torch::equal(FuseBaseline(chunks, torch::randn({2, 6}), FusionMode::kSummation, &sum,
                                    nullptr),
                       chunks));
    VectorFusion cat(FusionMode::kConcatenation, 8, 6);
    auto fused = FuseBaseline(chunks, torch::randn({2, 6}), FusionMode::kConcatenation, &cat,
                              nullptr);
    CHECK(fused.sizes() == chunks.sizes());
    CHECK_THROWS_AS(VectorFusion(FusionMode::kAmln, 8, 6), std::invalid_argument);
  }

  TEST_CASE("cross-attention over a single context frame adds one bias per item") {
    torch::manual_seed(8);
    CrossAttentionFusion cross(8, 2, 5);
    auto chunks = torch::randn({2, 8, 10, 3});
    auto ctx = torch::randn({2, 5, 1});
    auto delta = FuseBaseline(chunks, ctx, FusionMode::kCrossAttention, nullptr, &cross) - chunks;
    for (int64_t b = 0; b < 2; ++b) {
      auto d = delta[b].reshape({8, -1});
      CHECK((d - d.select(1, 0).unsqueeze(1)).abs().max().item<double>() < 1e-5);
    }
    CHECK((delta[0] - delta[1]).abs().max().item<double>() > 1e-4);
  }

  TEST_CASE("waveform encoder and decoder") {
    torch::manual_seed(9);
    SenOptions o;  // H = 256
    auto small = Small();
    Extractor ex(small);
    auto enc = ex->Encode(torch::zeros({1, 64}));
    auto bias = ex->named_parameters()["encoder.bias"];
    CHECK(torch::equal(enc, torch::relu(bias).view({1, 8, 1}).expand_as(enc)));
    for (int64_t t : {8, 9, 11, 12, 100, 401}) {
      const int64_t frames = ex->EncodedLength(t);
      CHECK((frames - 1) * small.stride + small.kernel >= t);
      CHECK((frames - 2) * small.stride + small.kernel < t);
      CHECK(ex->Encode(torch::randn({2, t})).size(2) == frames);
    }
    CHECK(ex->EncodedLength(2 * 400) == 2 * ex->EncodedLength(400) + 1);
    CHECK_THROWS_AS(ex->Encode(torch::zeros({1, 4})), std::invalid_argument);
    Extractor big(o);
    CHECK(big->Encode(torch::randn({1, 160})).size(1) == 256);
  }

  TEST_CASE("extraction keeps the length and the mask stays in the unit interval") {
    torch::manual_seed(10);
    auto o = Small();
    Extractor ex(o);
    for (int64_t t : {8, 33, 160, 501}) {
      auto y = torch::randn({2, t});
      auto g = RandomGuidance(o, 2);
      auto est = ex(y, g);
      CHECK(est.sizes() == y.sizes());
      auto mask = ex->EstimateMask(ex->Encode(y), g);
      CHECK(mask.min().item<double>() >= 0.0);
      CHECK(mask.max().item<double>() <= 1.0);
      CHECK(torch::allclose(ex->ExtractWithMask(y, mask), est, 1e-5, 1e-6));
      CHECK(torch::equal(est, ex(y, g)));
    }
  }

  TEST_CASE("a unit mask passes the encoder output straight to the decoder") {
    torch::manual_seed(11);
    Extractor ex(Small());
    auto y = torch::randn({1, 120});
    auto enc = ex->Encode(y);
    CHECK(torch::equal(ex->ExtractWithMask(y, torch::ones_like(enc)), ex->Decode(enc, 120)));
    CHECK(ex->ExtractWithMask(y, torch::zeros_like(enc)).abs().max().item<double>() ==
          doctest::Approx(std::abs(ex->named_parameters()["decoder.bias"].item<double>())));
    CHECK_THROWS_AS(ex->ExtractWithMask(y, torch::ones({1, 8, 3})), std::invalid_argument);
  }

  TEST_CASE("default stack has one adaptive and seven plain layers per pass") {
    torch::manual_seed(12);
    SenOptions o;
    DualPathStack stack(o);
    int adaptive = 0, plain = 0;
    const std::regex am("(intra|inter)[0-9]+_am"), layer("(intra|inter)[0-9]+_layer[0-9]+");
    for (const auto &m : stack->named_children()) {
      if (std::regex_match(m.key(), am)) ++adaptive;
      if (std::regex_match(m.key(), layer)) ++plain;
    }
    CHECK(adaptive == 2 * o.iterations);
    CHECK(plain == 2 * o.iterations * 7);
    CHECK(stack->named_parameters().contains("intra0_am.amln1.gamma.weight"));
  }

  TEST_CASE("extractor gradient matches finite differences") {
    torch::manual_seed(13);
    auto o = Small();
    o.positional_encoding = true;
    Extractor ex(o);
    ex->to(torch::kFloat64);
    auto y = torch::randn({1, 60}, torch::kFloat64);
    auto g = RandomGuidance(o, 1, 3, torch::kFloat64);
    auto target = torch::randn({1, 60}, torch::kFloat64);
    auto loss = [&] { return (ex(y, g) - target).pow(2).mean(); };
    CHECK(testing::GradientRelativeError(loss, ex->parameters(), 4) < 1e-3);
  }
}
