// training/trainer.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "sdrtse/checkpoint.h"
#include "sdrtse/metrics.h"
#include "sdrtse/training.h"

namespace sdrtse {

namespace fs = std::filesystem;
using nlohmann::json;

TripletSet TripletSet::Load(const Manifest &manifest) {
  TripletSet set;
  auto expect_same = [](const std::vector<torch::Tensor> &v, const fs::path &p) {
    if (v.size() > 1 && v.back().size(0) != v.front().size(0))
      throw std::runtime_error("waveform " + p.string() + " differs in length from the set");
  };
  for (const auto &e : manifest) {
    const Waveform mix = ReadWav(e.mixture_path);
    const Waveform tgt = ReadWav(e.target_path);
    const Waveform ref = ReadWav(e.reference_path);
    if (mix.size() != tgt.size())
      throw std::runtime_error("mixture and target lengths differ for " + e.mixture_path.string());
    if (set.sample_rate == 0) set.sample_rate = mix.sample_rate;
    for (int sr : {mix.sample_rate, tgt.sample_rate, ref.sample_rate})
      if (sr != set.sample_rate) throw std::runtime_error("mixed sample rates in manifest");
    set.mixtures.push_back(mix.ToTensor());
    set.targets.push_back(tgt.ToTensor());
    set.references.push_back(ref.ToTensor());
    set.speakers.push_back(e.speaker_id);
    expect_same(set.mixtures, e.mixture_path);
    expect_same(set.references, e.reference_path);
  }
  return set;
}

Batch TripletSet::Gather(const std::vector<int64_t> &indices) const {
  if (indices.empty()) throw std::invalid_argument("empty batch");
  std::vector<torch::Tensor> m, t, r;
  for (int64_t i : indices) {
    m.push_back(mixtures.at(i));
    t.push_back(targets.at(i));
    r.push_back(references.at(i));
  }
  return {torch::stack(m), torch::stack(t), torch::stack(r)};
}

json LossRecord::ToJson() const {
  json j = {{"step", step},   {"l_sisnr", l_sisnr}, {"l_rec", l_rec}, {"l_kl", l_kl},
            {"i_vclub", i_vclub}, {"l_ll", l_ll},   {"l_sim", l_sim}};
  if (val_si_snri) j["val_si_snri"] = *val_si_snri;
  return j;
}

LossRecord LossRecord::FromJson(const json &j) {
  LossRecord r;
  r.step = j.at("step").get<int64_t>();
  r.l_sisnr = j.at("l_sisnr").get<double>();
  r.l_rec = j.at("l_rec").get<double>();
  r.l_kl = j.at("l_kl").get<double>();
  r.i_vclub = j.at("i_vclub").get<double>();
  r.l_ll = j.at("l_ll").get<double>();
  r.l_sim = j.at("l_sim").get<double>();
  if (j.contains("val_si_snri")) r.val_si_snri = j.at("val_si_snri").get<double>();
  return r;
}

TrainState::TrainState(const RunConfig &cfg)
    : config(cfg),
      data_rng(cfg.seed * 0x9E3779B97F4A7C15ull + 1),
      noise(at::make_generator<at::CPUGeneratorImpl>(cfg.seed + 2)) {
  config.Resolve();
  config.Check();
  // Parameter initialisation draws from the default generator; seed it for
  // the duration of construction only.
  auto default_gen = at::detail::getDefaultCPUGenerator();
  const auto saved = default_gen.get_state();
  torch::manual_seed(config.seed);
  model = SdrTse(config);
  default_gen.set_state(saved);

  using G = ParamGroup;
  approx_opt = std::make_unique<torch::optim::Adam>(
      model->Parameters(G::kApprox), torch::optim::AdamOptions(config.optim.lr_approx));
  main_opt = std::make_unique<torch::optim::Adam>(
      model->Parameters({G::kGlobalEncoder, G::kSemanticEncoder, G::kDecoder, G::kGidn,
                         G::kExtractor}),
      torch::optim::AdamOptions(config.optim.lr));
  sim_opt = std::make_unique<torch::optim::Adam>(
      model->Parameters({G::kGlobalEncoder, G::kGidn}),
      torch::optim::AdamOptions(config.optim.lr_sim));
}

std::vector<AdamMoments> ExportAdamState(torch::optim::Adam &opt) {
  std::vector<AdamMoments> out;
  for (const auto &p : opt.param_groups().at(0).params()) {
    AdamMoments m;
    auto it = opt.state().find(p.unsafeGetTensorImpl());
    if (it != opt.state().end()) {
      const auto &s = static_cast<const torch::optim::AdamParamState &>(*it->second);
      m.present = true;
      m.step = s.step();
      m.exp_avg = s.exp_avg().clone();
      m.exp_avg_sq = s.exp_avg_sq().clone();
    }
    out.push_back(std::move(m));
  }
  return out;
}

void ImportAdamState(torch::optim::Adam &opt, const std::vector<AdamMoments> &moments) {
  const auto &params = opt.param_groups().at(0).params();
  if (moments.size() != params.size())
    throw std::runtime_error("optimiser state does not match the parameter list");
  opt.state().clear();
  for (size_t i = 0; i < params.size(); ++i) {
    if (!moments[i].present) continue;
    if (moments[i].exp_avg.sizes() != params[i].sizes())
      throw std::runtime_error("optimiser moment shape mismatch");
    auto s = std::make_unique<torch::optim::AdamParamState>();
    s->step(moments[i].step);
    s->exp_avg(moments[i].exp_avg.clone());
    s->exp_avg_sq(moments[i].exp_avg_sq.clone());
    opt.state()[params[i].unsafeGetTensorImpl()] = std::move(s);
  }
}

namespace {

bool Finite(const torch::Tensor &t) { return torch::isfinite(t).all().item<bool>(); }

void Require(bool ok, const std::string &what, int64_t step) {
  if (!ok)
    throw NonFiniteLoss("non-finite " + what + " at step " + std::to_string(step + 1) +
                        "; step rolled back");
}

// Backward pass already done; clip and apply.
void ClipAndStep(torch::optim::Adam &opt, double max_norm, const std::string &what,
                 int64_t step) {
  auto &params = opt.param_groups().at(0).params();
  const double norm = torch::nn::utils::clip_grad_norm_(params, max_norm);
  Require(std::isfinite(norm), what + " gradient norm", step);
  opt.step();
}

struct Snapshot {
  std::vector<torch::Tensor> params;
  std::vector<AdamMoments> approx, main, sim;
  torch::Tensor noise_state;
};

Snapshot TakeSnapshot(TrainState &state) {
  Snapshot s;
  for (const auto &p : state.model->parameters()) s.params.push_back(p.detach().clone());
  s.approx = ExportAdamState(*state.approx_opt);
  s.main = ExportAdamState(*state.main_opt);
  s.sim = ExportAdamState(*state.sim_opt);
  s.noise_state = state.noise.get_state();
  return s;
}

void Restore(TrainState &state, const Snapshot &s) {
  torch::NoGradGuard no_grad;
  auto params = state.model->parameters();
  for (size_t i = 0; i < params.size(); ++i) params[i].copy_(s.params[i]);
  ImportAdamState(*state.approx_opt, s.approx);
  ImportAdamState(*state.main_opt, s.main);
  ImportAdamState(*state.sim_opt, s.sim);
  state.noise.set_state(s.noise_state);
}

}  // namespace

Batch SampleBatch(TrainState &state, const TripletSet &data) {
  const auto n = static_cast<int64_t>(data.size());
  if (n == 0) throw std::invalid_argument("no training triplets");
  std::vector<int64_t> indices;
  for (int b = 0; b < state.config.optim.batch_size; ++b) {
    if (state.cursor >= static_cast<int64_t>(state.order.size())) {
      state.order.resize(n);
      std::iota(state.order.begin(), state.order.end(), 0);
      std::shuffle(state.order.begin(), state.order.end(), state.data_rng);
      state.cursor = 0;
    }
    indices.push_back(state.order[state.cursor++]);
  }
  Batch batch = data.Gather(indices);
  const int64_t length = batch.mixture.size(1);
  const auto crop = static_cast<int64_t>(std::llround(state.config.optim.crop_s * data.sample_rate));
  if (crop > 0 && crop < length) {
    std::vector<torch::Tensor> m, t;
    for (int64_t b = 0; b < batch.mixture.size(0); ++b) {
      const auto offset = static_cast<int64_t>(state.data_rng() % static_cast<uint64_t>(length - crop + 1));
      m.push_back(batch.mixture[b].narrow(0, offset, crop));
      t.push_back(batch.target[b].narrow(0, offset, crop));
    }
    batch.mixture = torch::stack(m);
    batch.target = torch::stack(t);
  }
  return batch;
}

MainLosses MainObjective(TrainState &state, const Batch &batch, const ForwardOutput &out) {
  const auto &w = state.config.weights;
  MainLosses l;
  l.l_sisnr = -SiSnr(out.estimate, batch.target).mean();
  l.l_rec = ReconstructionLoss(out.recon, out.ref.spec);
  l.l_kl = KlLoss(out.ref.z_c.mean);
  l.i_vclub = VclubEstimate(out.ref.pooled_c, out.ref.pooled_g, state.model->approx);
  l.total = w.sisnr * l.l_sisnr + w.rec * l.l_rec + w.kl * l.l_kl + w.mi * l.i_vclub;
  return l;
}

double ApproxPhase(TrainState &state, const ReferenceEncoding &ref) {
  auto c = ref.pooled_c.detach();
  auto g = ref.pooled_g.detach();
  auto &approx = state.model->approx;
  if (state.config.optim.approx_steps == 0) {
    torch::NoGradGuard no_grad;
    return LogLikelihood(c, g, approx).item<double>();
  }
  double first = 0.0;
  for (int k = 0; k < state.config.optim.approx_steps; ++k) {
    state.approx_opt->zero_grad();
    auto ll = LogLikelihood(c, g, approx);
    Require(Finite(ll), "log-likelihood", state.step);
    if (k == 0) first = ll.item<double>();
    (-state.config.weights.ll * ll).backward();
    ClipAndStep(*state.approx_opt, state.config.optim.clip_norm, "approximation", state.step);
  }
  return first;
}

MainLosses MainPhase(TrainState &state, const Batch &batch, const ForwardOutput &out) {
  auto l = MainObjective(state, batch, out);
  Require(Finite(l.total), "phase-2 objective", state.step);
  state.main_opt->zero_grad();
  l.total.backward();
  ClipAndStep(*state.main_opt, state.config.optim.clip_norm, "phase-2", state.step);
  // The bound also reached V; those gradients are not applied.
  state.approx_opt->zero_grad();
  return l;
}

double SimilarityPhase(TrainState &state, const Batch &batch, const torch::Tensor &estimate) {
  auto &m = state.model;
  const auto est = estimate.detach();
  const auto residual = (batch.mixture - est).detach();
  auto z_x = EmbedReference(batch.reference, state.config.stft, m->global_encoder, m->gidn);
  auto z_u = EmbedReference(est, state.config.stft, m->global_encoder, m->gidn);
  auto z_v = EmbedReference(residual, state.config.stft, m->global_encoder, m->gidn);
  auto l_sim = SimilarityLoss(z_x, z_u, z_v, state.config.gidn.literal_similarity_sign).mean();
  Require(Finite(l_sim), "similarity loss", state.step);
  state.sim_opt->zero_grad();
  (state.config.weights.sim * l_sim).backward();
  ClipAndStep(*state.sim_opt, state.config.optim.clip_norm, "similarity", state.step);
  return l_sim.item<double>();
}

LossRecord Step(TrainState &state, const Batch &batch) {
  if (state.inference_only)
    throw std::runtime_error("an inference-only checkpoint cannot be trained");
  if (batch.mixture.size(0) == 0) throw std::invalid_argument("empty batch");
  Snapshot snap = TakeSnapshot(state);
  LossRecord rec;
  try {
    auto out = state.model->forward(batch.mixture, batch.reference, /*deterministic=*/false,
                                    state.noise);
    rec.l_ll = ApproxPhase(state, out.ref);
    auto main = MainPhase(state, batch, out);
    rec.l_sisnr = main.l_sisnr.item<double>();
    rec.l_rec = main.l_rec.item<double>();
    rec.l_kl = main.l_kl.item<double>();
    rec.i_vclub = main.i_vclub.item<double>();
    rec.l_sim = SimilarityPhase(state, batch, out.estimate);
    for (const auto &p : state.model->parameters())
      Require(Finite(p), "parameter", state.step);
  } catch (const NonFiniteLoss &) {
    Restore(state, snap);
    throw;
  }
  rec.step = ++state.step;
  return rec;
}

double Validate(TrainState &state, const TripletSet &data, int limit) {
  torch::NoGradGuard no_grad;
  auto n = static_cast<int64_t>(data.size());
  if (limit > 0) n = std::min<int64_t>(n, limit);
  if (n == 0) throw std::invalid_argument("empty validation set");
  const int64_t bs = state.config.optim.batch_size;
  double total = 0.0;
  for (int64_t start = 0; start < n; start += bs) {
    std::vector<int64_t> idx(std::min(bs, n - start));
    std::iota(idx.begin(), idx.end(), start);
    auto batch = data.Gather(idx);
    auto est = state.model->Extract(batch.mixture, batch.reference);
    auto gain = SiSnr(est, batch.target) - SiSnr(batch.mixture, batch.target);
    total += gain.sum().item<double>();
  }
  return total / static_cast<double>(n);
}

std::vector<LossRecord> ReadMetricsLog(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics log " + path.string());
  std::vector<LossRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(LossRecord::FromJson(json::parse(line)));
    } catch (const json::exception &e) {
      throw std::runtime_error("malformed metrics log " + path.string() + " line " +
                               std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

TrainResult Train(TrainState &state, const TripletSet &train, const TripletSet &val,
                  const TrainOptions &opts) {
  if (state.inference_only)
    throw std::runtime_error("an inference-only checkpoint cannot be trained");
  TrainResult result;
  fs::create_directories(opts.out_dir / "checkpoints");
  result.log_path = opts.out_dir / "metrics.jsonl";
  result.best_checkpoint = opts.out_dir / "best.ckpt";
  result.final_checkpoint = opts.out_dir / "final.ckpt";

  // A resumed run drops records past its checkpoint so the log is one trajectory.
  if (fs::exists(result.log_path)) {
    std::vector<LossRecord> kept;
    for (auto &r : ReadMetricsLog(result.log_path))
      if (r.step <= state.step) kept.push_back(r);
    std::ofstream rewrite(result.log_path, std::ios::trunc);
    for (const auto &r : kept) rewrite << r.ToJson().dump() << '\n';
  }
  std::ofstream log(result.log_path, std::ios::app);
  if (!log) throw std::runtime_error("cannot write " + result.log_path.string());

  const auto &o = state.config.optim;
  int failures = 0;
  while (state.step < o.max_steps) {
    Batch batch = SampleBatch(state, train);
    LossRecord rec;
    try {
      rec = Step(state, batch);
    } catch (const NonFiniteLoss &e) {
      std::cerr << "warning: " << e.what() << "\n";
      if (++failures > 10) throw std::runtime_error("aborting: repeated non-finite losses");
      continue;
    }
    failures = 0;
    bool stop = false;
    if (state.step % o.eval_every == 0) {
      const double v = Validate(state, val, o.eval_limit);
      rec.val_si_snri = v;
      if (v > state.best_val) {
        state.best_val = v;
        state.best_step = state.step;
        state.evals_since_best = 0;
        SaveCheckpoint(state, result.best_checkpoint);
      } else if (++state.evals_since_best >= o.patience) {
        stop = true;
      }
      if (opts.verbose)
        std::cerr << "step " << state.step << "  loss_sisnr " << rec.l_sisnr
                  << "  val_si_snri " << v << " dB\n";
    }
    log << rec.ToJson().dump() << '\n';
    log.flush();
    if (opts.on_record) opts.on_record(rec, state);
    if (state.step % o.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "step_%08lld.ckpt", static_cast<long long>(state.step));
      SaveCheckpoint(state, opts.out_dir / "checkpoints" / name);
    }
    if (stop) {
      result.converged = true;
      break;
    }
  }
  SaveCheckpoint(state, result.final_checkpoint);
  result.steps = state.step;
  result.best_val = state.best_val;
  result.best_step = state.best_step;
  return result;
}

}  // namespace sdrtse
