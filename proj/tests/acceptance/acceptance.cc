// tests/acceptance/acceptance.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Criteria 5 and 6 train two desk-scale models
// and take the bulk of the runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mi_benchmark.h"
#include "sdrtse/checkpoint.h"
#include "sdrtse/corpus.h"
#include "sdrtse/evaluate.h"
#include "sdrtse/gidn.h"
#include "sdrtse/metrics.h"
#include "sdrtse/rsen.h"
#include "sdrtse/sen.h"
#include "sdrtse/signal.h"
#include "sdrtse/training.h"
#include "test_util.h"

namespace fs = std::filesystem;
using namespace sdrtse;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records one measured quantity and whether it met its bound.
  void Expect(bool ok, const std::string &what) {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [miss]");
  }
};

std::string Num(double v, int prec = 4) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

void Report(int id, const std::string &name, const Outcome &o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": "
            << o.detail.str() << std::endl;
}

std::vector<float> Sine(int64_t n, double hz, double amp, int sr) {
  std::vector<float> x(n);
  for (int64_t i = 0; i < n; ++i)
    x[i] = static_cast<float>(amp * std::sin(2 * std::numbers::pi * hz * i / sr));
  return x;
}

// ---------------------------------------------------------------- 1
Outcome MetricOracles() {
  Outcome o;
  const double base = SiSnr(std::vector<float>{1, 1}, std::vector<float>{1, 0});
  o.Expect(std::abs(base) <= 1e-9, "si_snr([1,1],[1,0]) = " + Num(base, 3));

  std::mt19937_64 rng(1);
  std::normal_distribution<float> n(0, 0.3f);
  std::vector<float> ref(8000), est(8000);
  for (size_t i = 0; i < ref.size(); ++i) {
    ref[i] = n(rng);
    est[i] = ref[i] + 0.3f * n(rng);
  }
  double worst = 0;
  const double s0 = SiSnr(est, ref);
  for (float a : {1e-3f, 0.1f, 2.0f, 37.0f, 1e3f}) {
    std::vector<float> scaled(est);
    for (auto &v : scaled) v *= a;
    worst = std::max(worst, std::abs(SiSnr(scaled, ref) - s0));
  }
  o.Expect(worst <= 1e-6, "scale drift " + Num(worst, 3) + " dB");

  const int sr = 8000;
  auto u = Sine(16000, 220, 0.5, sr), v = Sine(16000, 1130, 0.5, sr);
  std::vector<float> mix(u.size());
  for (size_t i = 0; i < mix.size(); ++i) mix[i] = u[i] + v[i];
  const auto clean = SpeakerConfusionRatio(u, u, mix, sr);
  const auto same = SpeakerConfusionRatio(mix, u, mix, sr);
  const auto wrong = SpeakerConfusionRatio(v, u, mix, sr);
  o.Expect(clean.r_scr && *clean.r_scr == 0.0, "r_scr(ref) = " + Num(clean.r_scr.value_or(-1)));
  o.Expect(same.r_scr && *same.r_scr == 0.0, "r_scr(mix) = " + Num(same.r_scr.value_or(-1)));
  o.Expect(wrong.r_scr && *wrong.r_scr >= 90.0,
           "r_scr(interferer) = " + Num(wrong.r_scr.value_or(-1)));

  int agree = 0;
  std::mt19937_64 r2(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int64_t hop = 1 + r2() % 500, len = hop + r2() % 800, t = 1 + r2() % 30000;
    int64_t m = 1;
    while ((m - 1) * hop + len < t) ++m;
    agree += NumChunks(t, len, hop) == m;
  }
  o.Expect(agree == 50, "chunk count agrees on " + std::to_string(agree) + "/50");
  return o;
}

// ---------------------------------------------------------------- 2
Outcome VclubBenchmark() {
  Outcome o;
  for (double rho : {0.5, 0.9}) {
    const double est = testing::TrainedVclub(8, rho, false, 2000, 11);
    const double mi = testing::AnalyticMi(8, rho);
    o.Expect(est >= mi - 0.3,
             "rho " + Num(rho, 2) + ": estimate " + Num(est) + " vs MI " + Num(mi));
  }
  const double indep = testing::TrainedVclub(8, 0.9, true, 2000, 12);
  o.Expect(std::abs(indep) <= 0.1, "independent " + Num(indep, 3));
  torch::manual_seed(13);
  VariationalApproxOptions vo;
  vo.condition_dim = vo.target_dim = 8;
  vo.hidden = 64;
  VariationalApprox approx(vo);
  double single = 0;
  for (int t = 0; t < 20; ++t)
    single = std::max(single, std::abs(VclubEstimate(torch::randn({1, 8}) * 4,
                                                     torch::randn({1, 8}), approx)
                                           .item<double>()));
  o.Expect(single == 0.0, "N=1 estimate " + Num(single));
  return o;
}

// ---------------------------------------------------------------- 3
Outcome ReductionAndGradients(const TripletSet &micro_train) {
  Outcome o;
  torch::manual_seed(21);
  Amln amln(16, 8);
  amln->to(torch::kFloat64);
  {
    torch::NoGradGuard ng;
    amln->gamma->weight.zero_();
    amln->gamma->bias.fill_(1.0);
    amln->beta->weight.zero_();
    amln->beta->bias.zero_();
  }
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    auto x = torch::randn({2, 7, 16}, torch::kFloat64) * (0.1 + i % 9);
    auto d = amln(x, torch::randn({2, 8}, torch::kFloat64)) - torch::layer_norm(x, {16});
    worst = std::max(worst, d.abs().max().item<double>());
  }
  o.Expect(worst <= 1e-6, "AMLN vs LN " + Num(worst, 3));

  torch::manual_seed(22);
  Amln fresh(6, 3);
  fresh->to(torch::kFloat64);
  auto x = torch::randn({2, 5, 6}, torch::kFloat64), z = torch::randn({2, 3}, torch::kFloat64);
  auto w = torch::randn({2, 5, 6}, torch::kFloat64);
  const double e_amln = testing::GradientRelativeError(
      [&] { return (fresh(x, z) * w).sum(); }, fresh->parameters(), 12);
  o.Expect(e_amln < 1e-3, "AMLN grad " + Num(e_amln, 3));

  GidnOptions go;
  go.channels = 8;
  go.reduction = 2;
  ChannelAttention att(go);
  att->to(torch::kFloat64);
  auto zg = torch::randn({3, 8, 9}, torch::kFloat64), wt = torch::randn({3, 8}, torch::kFloat64);
  const double e_att = testing::GradientRelativeError([&] { return (att(zg) * wt).sum(); },
                                                      att->parameters(), 12);
  o.Expect(e_att < 1e-3, "attention grad " + Num(e_att, 3));

  TrainState s(testing::MicroConfig());
  s.model->to(torch::kFloat64);
  auto batch = micro_train.Gather({0, 1});
  batch.mixture = batch.mixture.to(torch::kFloat64);
  batch.target = batch.target.to(torch::kFloat64);
  batch.reference = batch.reference.to(torch::kFloat64);
  auto loss = [&] {
    auto gen = at::make_generator<at::CPUGeneratorImpl>(23);
    auto out = s.model->forward(batch.mixture, batch.reference, false, gen);
    return MainObjective(s, batch, out).total;
  };
  std::vector<torch::Tensor> params;
  for (auto g : {ParamGroup::kGlobalEncoder, ParamGroup::kSemanticEncoder, ParamGroup::kDecoder,
                 ParamGroup::kGidn, ParamGroup::kExtractor})
    for (auto &p : s.model->Parameters(g)) params.push_back(p);
  const double e_obj = testing::GradientRelativeError(loss, params, 2);
  o.Expect(e_obj < 1e-3, "phase-2 objective grad " + Num(e_obj, 3));
  return o;
}

// ---------------------------------------------------------------- 4
Outcome StructuralInvariants(const TripletSet &micro_train) {
  Outcome o;
  torch::manual_seed(31);
  std::mt19937_64 rng(31);
  double seg = 0;
  for (int i = 0; i < 100; ++i) {
    const int64_t k = 2 * (1 + rng() % 40), t = 1 + rng() % 500;
    auto f = torch::randn({2, 4, t}, torch::kFloat64);
    auto s = Segment(f, k);
    seg = std::max(seg, (Merge(s.chunks, t) - f).abs().max().item<double>());
  }
  o.Expect(seg <= 1e-6, "segment/merge " + Num(seg, 3));

  double in = 0;
  for (int i = 0; i < 20; ++i) {
    auto x = torch::randn({2, 8, 64}, torch::kFloat64) * (torch::rand({1, 8, 1}, torch::kFloat64) * 15 + 5);
    auto a = torch::rand({1, 8, 1}, torch::kFloat64) * 1.5 + 0.5;
    auto b = torch::randn({1, 8, 1}, torch::kFloat64) * 10;
    in = std::max(in, (InstanceNorm(a * x + b) - InstanceNorm(x)).abs().max().item<double>());
  }
  o.Expect(in <= 1e-5, "IN affine " + Num(in, 3));

  GidnOptions go;
  go.channels = 32;
  go.reduction = 4;
  ChannelAttention att(go);
  double lo = 1, hi = 0;
  for (double scale : {1e-3, 1.0, 10.0}) {
    auto wts = att(torch::randn({16, 32, 20}) * scale);
    lo = std::min(lo, wts.min().item<double>());
    hi = std::max(hi, wts.max().item<double>());
  }
  o.Expect(lo > 0 && hi < 1, "attention weights in [" + Num(lo, 3) + ", 1 - " + Num(1 - hi, 3) + "]");

  auto l = SimilarityLoss(torch::randn({500, 16}), torch::randn({500, 16}), torch::randn({500, 16}));
  auto a = torch::randn({4, 16});
  auto ext = torch::cat({l, SimilarityLoss(a, a, -a), SimilarityLoss(a, -a, a)});
  o.Expect(ext.min().item<double>() >= -2.0 && ext.max().item<double>() <= 2.0,
           "loss_sim in [" + Num(ext.min().item<double>()) + ", " +
               Num(ext.max().item<double>()) + "]");

  TrainState s(testing::MicroConfig());
  auto batch = micro_train.Gather({0, 1});
  auto out = s.model->forward(batch.mixture, batch.reference, false, s.noise);
  auto snap = [&] {
    std::map<std::string, torch::Tensor> m;
    for (auto &p : s.model->named_parameters()) m[p.key()] = p.value().detach().clone();
    return m;
  };
  auto changed = [](const auto &x, const auto &y) {
    std::set<std::string> g;
    for (const auto &[k, v] : x)
      if (!torch::equal(v, y.at(k))) g.insert(k.substr(0, k.find('.')));
    return g;
  };
  auto p0 = snap();
  ApproxPhase(s, out.ref);
  auto p1 = snap();
  MainPhase(s, batch, out);
  auto p2 = snap();
  SimilarityPhase(s, batch, out.estimate);
  auto p3 = snap();
  const auto c1 = changed(p0, p1), c2 = changed(p1, p2), c3 = changed(p2, p3);
  o.Expect(c1 == std::set<std::string>{"approx"}, "phase 1 touches only V");
  o.Expect(!c2.contains("approx"), "phase 2 leaves V");
  o.Expect(!c3.contains("extractor") && c3 == std::set<std::string>{"gidn", "global_encoder"},
           "phase 3 leaves F bit-identical");
  return o;
}

// ---------------------------------------------------------------- 5, 6
// Pooled semantic/global latents of every reference of a set, deterministic.
std::pair<torch::Tensor, torch::Tensor> PooledLatents(SdrTse &model, const TripletSet &set) {
  torch::NoGradGuard ng;
  std::vector<torch::Tensor> c, g;
  for (size_t start = 0; start < set.size(); start += 16) {
    std::vector<int64_t> idx;
    for (size_t i = start; i < std::min(set.size(), start + 16); ++i) idx.push_back(i);
    auto enc = model->EncodeReference(set.Gather(idx).reference, true);
    c.push_back(enc.pooled_c);
    g.push_back(enc.pooled_g);
  }
  return {torch::cat(c), torch::cat(g)};
}

double MonitorVclub(SdrTse &model, const TripletSet &set) {
  auto [c, g] = PooledLatents(model, set);
  VclubProbeOptions po;
  po.seed = 3;
  return ProbeVclub(c, g, po);
}

struct TrainedRun {
  std::unique_ptr<TrainState> state;
  double minutes = 0;
  AggregateMetrics metrics;
  double monitor_start = 0, monitor_end = 0;
};

TrainedRun TrainDesk(RunConfig cfg, const TripletSet &train, const TripletSet &test,
                     const Manifest &test_manifest, const fs::path &dir) {
  TrainedRun r;
  fs::remove_all(dir);
  r.state = std::make_unique<TrainState>(cfg);
  r.monitor_start = MonitorVclub(r.state->model, train);
  TrainOptions opts;
  opts.out_dir = dir;
  opts.on_record = [&](const LossRecord &rec, TrainState &) {
    if (rec.val_si_snri)
      std::cout << "  " << ToString(cfg.sen.guidance) << " step " << rec.step << " val SI-SNRi "
                << Num(*rec.val_si_snri) << " dB" << std::endl;
  };
  const auto t0 = std::chrono::steady_clock::now();
  Train(*r.state, train, test, opts);
  r.minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  r.monitor_end = MonitorVclub(r.state->model, train);
  r.metrics = EvaluateModel(r.state->model, test_manifest, cfg.metric,
                            ToString(cfg.sen.guidance))
                  .Aggregate();
  return r;
}

std::pair<torch::Tensor, std::vector<int64_t>> Features(
    const std::vector<EmbeddingRow> &rows, bool use_zs, std::map<std::string, int64_t> &ids) {
  std::vector<torch::Tensor> x;
  std::vector<int64_t> y;
  for (const auto &r : rows) {
    const auto &v = use_zs ? r.z_s : r.z_c;
    x.push_back(torch::tensor(v));
    auto it = ids.try_emplace(r.speaker_id, static_cast<int64_t>(ids.size())).first;
    y.push_back(it->second);
  }
  return {torch::stack(x), y};
}

double MeanCosine(const std::vector<EmbeddingRow> &rows, bool same) {
  double total = 0;
  int64_t n = 0;
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = i + 1; j < rows.size(); ++j) {
      if (rows[i].id == rows[j].id || (rows[i].speaker_id == rows[j].speaker_id) != same) continue;
      total += GuardedCosine(torch::tensor(rows[i].z_s), torch::tensor(rows[j].z_s)).item<double>();
      ++n;
    }
  return n ? total / n : 0.0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"acceptance run"};
  std::string work = (fs::temp_directory_path() / "sdrtse_acceptance").string();
  std::vector<int> only;
  app.add_option("--work-dir", work, "scratch directory for corpora and runs");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);
  torch::set_num_threads(1);
  auto wanted = [&](int id) {
    return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
  };

  const fs::path root(work);
  fs::create_directories(root);
  bool all = true;
  auto record = [&](int id, const std::string &name, const Outcome &o) {
    Report(id, name, o);
    all = all && o.pass;
  };

  // Micro corpus for the gradient and partition checks.
  TripletSet micro;
  if (wanted(3) || wanted(4)) {
    fs::remove_all(root / "micro");
    auto s = SynthCorpus(testing::MicroConfig().corpus, root / "micro");
    micro = TripletSet::Load(FilterSplit(s.manifest, "train"));
  }
  if (wanted(1)) record(1, "metric oracles", MetricOracles());
  if (wanted(2)) record(2, "vCLUB Gaussian benchmark", VclubBenchmark());
  if (wanted(3)) record(3, "AMLN reduction and gradients", ReductionAndGradients(micro));
  if (wanted(4)) record(4, "structural invariants", StructuralInvariants(micro));

  if (wanted(5) || wanted(6)) {
    const RunConfig cfg = DeskScaleConfig();
    fs::remove_all(root / "desk");
    const auto corpus = SynthCorpus(cfg.corpus, root / "desk");
    const auto train_m = FilterSplit(corpus.manifest, "train");
    const auto test_m = FilterSplit(corpus.manifest, "test");
    const auto train = TripletSet::Load(train_m), test = TripletSet::Load(test_m);
    std::cout << "desk corpus: " << cfg.corpus.speakers << " speakers, " << train.size()
              << " train / " << test.size() << " test triplets" << std::endl;

    auto zs = TrainDesk(cfg, train, test, test_m, root / "run_zs");
    Outcome o5;
    o5.Expect(zs.minutes <= 30.0, "training " + Num(zs.minutes, 3) + " min");
    o5.Expect(zs.metrics.si_snri_db > 5.0, "SI-SNRi " + Num(zs.metrics.si_snri_db) + " dB");
    o5.Expect(zs.metrics.r_scr_pct && *zs.metrics.r_scr_pct < 30.0,
              "r_scr " + Num(zs.metrics.r_scr_pct.value_or(-1)) + " %");
    o5.Expect(zs.monitor_end < zs.monitor_start, "I_vCLUB " + Num(zs.monitor_start) + " -> " +
                                                      Num(zs.monitor_end));
    if (wanted(5)) record(5, "desk-scale end-to-end", o5);

    if (wanted(6)) {
      auto zc_cfg = cfg;
      zc_cfg.sen.guidance = Guidance::kSemantic;
      auto zc = TrainDesk(zc_cfg, train, test, test_m, root / "run_zc");

      // Speaker-identity probe on a larger set of held-out synthetic voices.
      auto probe_cfg = cfg.corpus;
      probe_cfg.speakers = 8;
      probe_cfg.utterances_per_speaker = 12;
      probe_cfg.seed = cfg.corpus.seed + 1000;
      fs::remove_all(root / "probe");
      const auto probe = SynthCorpus(probe_cfg, root / "probe");
      const auto tr_rows = ComputeEmbeddings(zs.state->model, FilterSplit(probe.manifest, "train"));
      const auto te_rows = ComputeEmbeddings(zs.state->model, FilterSplit(probe.manifest, "test"));
      std::map<std::string, int64_t> ids;
      auto [xs_tr, y_tr] = Features(tr_rows, true, ids);
      auto [xs_te, y_te] = Features(te_rows, true, ids);
      auto [xc_tr, yc_tr] = Features(tr_rows, false, ids);
      auto [xc_te, yc_te] = Features(te_rows, false, ids);
      const double acc_s = LinearProbeAccuracy(xs_tr, y_tr, xs_te, y_te);
      const double acc_c = LinearProbeAccuracy(xc_tr, yc_tr, xc_te, yc_te);
      std::cout << "  z_s cosine: same speaker " << Num(MeanCosine(te_rows, true))
                << ", different speaker " << Num(MeanCosine(te_rows, false)) << std::endl;

      Outcome o6;
      o6.Expect(acc_s - acc_c >= 0.20, "probe accuracy z_s " + Num(100 * acc_s, 3) +
                                           "% vs pooled z_c " + Num(100 * acc_c, 3) + "%");
      o6.Expect(zs.metrics.si_snri_db >= zc.metrics.si_snri_db,
                "SI-SNRi z_s " + Num(zs.metrics.si_snri_db) + " dB vs z_c " +
                    Num(zc.metrics.si_snri_db) + " dB");
      record(6, "disentanglement direction", o6);
    }
  }
  std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
  return all ? 0 : 1;
}
