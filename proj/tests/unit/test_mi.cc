// tests/unit/test_mi.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mi_benchmark.h"
#include "sdrtse/mi.h"
#include "test_util.h"

using namespace sdrtse;

namespace {

VariationalApprox MakeApprox(int64_t cond, int64_t target, uint64_t seed, int layers = 4) {
  torch::manual_seed(seed);
  VariationalApproxOptions o;
  o.condition_dim = cond;
  o.target_dim = target;
  o.hidden = 16;
  o.layers = layers;
  VariationalApprox a(o);
  a->to(torch::kFloat64);
  return a;
}

// Zeroes the last layer of the log-variance stack: unit predicted variance.
void UnitVariance(VariationalApprox &a) {
  torch::NoGradGuard ng;
  std::string last;
  for (auto &p : a->named_parameters())
    if (p.key().rfind("logvar.", 0) == 0) last = p.key().substr(0, p.key().rfind('.'));
  for (auto &p : a->named_parameters())
    if (p.key().rfind(last + ".", 0) == 0) p.value().zero_();
}

// log N(c; m, diag exp(lv)) accumulated one coordinate at a time.
double DensityOracle(const torch::Tensor &c, const torch::Tensor &m, const torch::Tensor &lv) {
  double s = 0;
  for (int64_t d = 0; d < c.size(0); ++d) {
    const double var = std::exp(lv[d].item<double>());
    const double diff = c[d].item<double>() - m[d].item<double>();
    s += -0.5 * std::log(2 * std::numbers::pi * var) - diff * diff / (2 * var);
  }
  return s;
}

}  // namespace

TEST_SUITE("mi") {
  TEST_CASE("density at the predicted mean with unit variance") {
    auto a = MakeApprox(3, 2, 1);
    UnitVariance(a);
    auto g = torch::randn({4, 3}, torch::kFloat64);
    auto c = a(g).mean.detach();
    auto lq = LogQ(c, g, a);
    for (int64_t i = 0; i < 4; ++i)
      CHECK(lq[i].item<double>() == doctest::Approx(-std::log(2 * std::numbers::pi)).epsilon(1e-12));
    CHECK(LogLikelihood(c, g, a).item<double>() == doctest::Approx(-1.8378770664).epsilon(1e-9));
  }

  TEST_CASE("density decreases away from the mean") {
    auto a = MakeApprox(3, 2, 2);
    auto g = torch::randn({1, 3}, torch::kFloat64);
    auto m = a(g).mean.detach();
    double prev = LogQ(m, g, a).item<double>();
    for (double r : {0.1, 0.5, 1.0, 3.0}) {
      const double v = LogQ(m + r, g, a).item<double>();
      CHECK(v < prev);
      prev = v;
    }
  }

  TEST_CASE("density matches a brute-force oracle") {
    auto a = MakeApprox(5, 4, 3);
    auto g = torch::randn({6, 5}, torch::kFloat64);
    auto c = torch::randn({6, 4}, torch::kFloat64) * 2;
    auto q = a(g);
    auto lq = LogQ(c, g, a);
    auto table = PairwiseLogQ(c, g, a);
    for (int64_t i = 0; i < 6; ++i) {
      CHECK(std::abs(lq[i].item<double>() - DensityOracle(c[i], q.mean[i], q.logvar[i])) < 1e-10);
      for (int64_t j = 0; j < 6; ++j)
        CHECK(std::abs(table[i][j].item<double>() -
                       DensityOracle(c[j], q.mean[i], q.logvar[i])) < 1e-10);
    }
  }

  TEST_CASE("vclub estimate with a single pair is exactly zero") {
    auto a = MakeApprox(5, 4, 4);
    for (int t = 0; t < 10; ++t)
      CHECK(VclubEstimate(torch::randn({1, 4}, torch::kFloat64) * 5,
                          torch::randn({1, 5}, torch::kFloat64), a)
                .item<double>() == 0.0);
  }

  TEST_CASE("vclub estimate equals the pairwise formula") {
    auto a = MakeApprox(3, 3, 5);
    auto c = torch::randn({5, 3}, torch::kFloat64), g = torch::randn({5, 3}, torch::kFloat64);
    auto q = a(g);
    double expected = 0;
    for (int i = 0; i < 5; ++i) {
      double neg = 0;
      for (int j = 0; j < 5; ++j) neg += DensityOracle(c[j], q.mean[i], q.logvar[i]);
      expected += DensityOracle(c[i], q.mean[i], q.logvar[i]) - neg / 5;
    }
    CHECK(VclubEstimate(c, g, a).item<double>() == doctest::Approx(expected / 5).epsilon(1e-10));
  }

  TEST_CASE("larger variance lowers the likelihood of exact-mean data") {
    auto a = MakeApprox(3, 2, 6);
    UnitVariance(a);
    auto g = torch::randn({8, 3}, torch::kFloat64);
    auto c = a(g).mean.detach();
    const double at_unit = LogLikelihood(c, g, a).item<double>();
    {
      torch::NoGradGuard ng;
      for (auto &p : a->named_parameters())
        if (p.key().rfind("logvar.", 0) == 0 && p.key().find("bias") != std::string::npos &&
            p.value().size(0) == 2)
          p.value().fill_(1.0);
    }
    CHECK(LogLikelihood(c, g, a).item<double>() < at_unit);
  }

  TEST_CASE("log-variance is clamped") {
    auto a = MakeApprox(2, 2, 7, 1);
    {
      torch::NoGradGuard ng;
      for (auto &p : a->named_parameters())
        if (p.key().rfind("logvar.", 0) == 0) p.value().fill_(100.0);
    }
    auto q = a(torch::ones({3, 2}, torch::kFloat64));
    CHECK(q.logvar.max().item<double>() == 10.0);
  }

  TEST_CASE("log-likelihood gradient matches finite differences") {
    auto a = MakeApprox(4, 3, 8);
    auto c = torch::randn({7, 3}, torch::kFloat64), g = torch::randn({7, 4}, torch::kFloat64);
    auto loss = [&] { return -LogLikelihood(c, g, a); };
    CHECK(testing::GradientRelativeError(loss, a->parameters(), 8) < 1e-3);
    auto vloss = [&] { return VclubEstimate(c, g, a); };
    auto cc = c.clone().requires_grad_(), gg = g.clone().requires_grad_();
    auto wrt_inputs = [&] { return VclubEstimate(cc, gg, a); };
    CHECK(testing::GradientRelativeError(vloss, a->parameters(), 8) < 1e-3);
    CHECK(testing::GradientRelativeError(wrt_inputs, {cc, gg}, 8) < 1e-3);
  }

  TEST_CASE("shape errors") {
    auto a = MakeApprox(4, 3, 9);
    CHECK_THROWS_AS(LogQ(torch::zeros({2, 2}), torch::zeros({2, 4}), a), std::invalid_argument);
    CHECK_THROWS_AS(VclubEstimate(torch::zeros({0, 3}), torch::zeros({0, 4}), a),
                    std::invalid_argument);
    CHECK_THROWS_AS(LogQ(torch::zeros({3, 3}), torch::zeros({2, 4}), a), std::invalid_argument);
  }

  TEST_CASE("upper bound on the 4-dimensional Gaussian benchmark") {
    for (double rho : {0.5, 0.9}) {
      const double est = testing::TrainedVclub(4, rho, false, 2000, 17);
      CHECK(est >= testing::AnalyticMi(4, rho) - 0.3);
    }
    CHECK(std::abs(testing::TrainedVclub(4, 0.9, true, 1000, 18)) <= 0.1);
  }

  TEST_CASE("probe estimate leaves the default generator untouched") {
    torch::manual_seed(99);
    auto expected = torch::randn({3});
    torch::manual_seed(99);
    auto gen = at::make_generator<at::CPUGeneratorImpl>(1);
    auto d = testing::SampleCorrelated(200, 3, 0.8, gen);
    VclubProbeOptions po;
    po.steps = 50;
    const double v = ProbeVclub(d.c, d.g, po);
    CHECK(std::isfinite(v));
    CHECK(torch::equal(torch::randn({3}), expected));
  }
}
