// training/config.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sdrtse/config.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace sdrtse {

using nlohmann::json;

namespace {

// Reads the known keys of one section and refuses anything else.
class SectionReader {
 public:
  SectionReader(const json &root, const std::string &name) : name_(name) {
    if (!root.contains(name)) return;
    section_ = &root.at(name);
    if (!section_->is_object())
      throw std::invalid_argument("config section '" + name + "' must be an object");
  }

  template <typename T>
  void Read(const char *key, T *out) {
    known_.insert(key);
    if (section_ == nullptr || !section_->contains(key)) return;
    try {
      *out = section_->at(key).get<T>();
    } catch (const json::exception &e) {
      throw std::invalid_argument("config key " + name_ + "." + key + ": " + e.what());
    }
  }

  void Finish() const {
    if (section_ == nullptr) return;
    for (const auto &item : section_->items())
      if (!known_.count(item.key()))
        throw std::invalid_argument("unknown config key " + name_ + "." + item.key());
  }

 private:
  std::string name_;
  const json *section_ = nullptr;
  std::set<std::string> known_;
};

const std::set<std::string> kSections = {"seed",    "stft", "corpus",  "rsen",  "mi",
                                         "gidn",    "sen",  "weights", "optim", "metric"};

}  // namespace

std::string Fnv1aHex(const std::string &data) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::Resolve() {
  rsen.num_bins = stft.NumBins();
  mi.condition_dim = rsen.global_dim;
  mi.target_dim = rsen.semantic_dim;
  gidn.channels = rsen.global_dim;
  // z_s and pooled z_g share the global width.
  sen.condition_dim = rsen.global_dim;
  sen.context_dim = rsen.semantic_dim;
}

void RunConfig::Check() const {
  stft.Check();
  corpus.Check();
  rsen.Check();
  sen.Check();
  metric.Check();
  if (mi.hidden <= 0 || mi.layers < 1 || mi.logvar_min >= mi.logvar_max)
    throw std::invalid_argument("invalid approximation-network settings");
  if (gidn.reduction <= 0 || gidn.reduction > gidn.channels)
    throw std::invalid_argument("channel-attention reduction must lie in [1, d_g]");
  for (double w : {weights.sisnr, weights.rec, weights.kl, weights.mi, weights.ll, weights.sim})
    if (!(w >= 0.0)) throw std::invalid_argument("loss weights must be non-negative");
  const auto &o = optim;
  if (!(o.lr > 0) || !(o.lr_approx > 0) || !(o.lr_sim > 0) || !(o.clip_norm > 0))
    throw std::invalid_argument("learning rates and clip norm must be positive");
  if (o.batch_size < 1 || o.max_steps < 0 || o.approx_steps < 0 || o.eval_every < 1 ||
      o.checkpoint_every < 1 || o.patience < 1 || o.crop_s < 0 || o.eval_limit < 0)
    throw std::invalid_argument("invalid optimisation settings");
}

json RunConfig::ToJson() const {
  json j;
  j["seed"] = seed;
  j["stft"] = {{"win_length", stft.win_length},
               {"hop_length", stft.hop_length},
               {"fft_size", stft.fft_size}};
  j["corpus"] = {{"speakers", corpus.speakers},
                 {"utterances_per_speaker", corpus.utterances_per_speaker},
                 {"duration_s", corpus.duration_s},
                 {"sample_rate", corpus.sample_rate},
                 {"seed", corpus.seed},
                 {"snr_low_db", corpus.snr_low_db},
                 {"snr_high_db", corpus.snr_high_db},
                 {"test_fraction", corpus.test_fraction},
                 {"mixtures_per_utterance", corpus.mixtures_per_utterance}};
  j["rsen"] = {{"global_dim", rsen.global_dim},
               {"semantic_dim", rsen.semantic_dim},
               {"channels", rsen.channels},
               {"blocks", rsen.blocks},
               {"kernel", rsen.kernel},
               {"downsample_blocks", rsen.downsample_blocks}};
  j["mi"] = {{"hidden", mi.hidden},
             {"layers", mi.layers},
             {"logvar_min", mi.logvar_min},
             {"logvar_max", mi.logvar_max}};
  j["gidn"] = {{"reduction", gidn.reduction},
               {"literal_similarity_sign", gidn.literal_similarity_sign}};
  j["sen"] = {{"feature_dim", sen.feature_dim},
              {"kernel", sen.kernel},
              {"stride", sen.stride},
              {"chunk", sen.chunk},
              {"iterations", sen.iterations},
              {"plain_layers", sen.plain_layers},
              {"heads", sen.heads},
              {"ff_dim", sen.ff_dim},
              {"fusion", ToString(sen.fusion)},
              {"guidance", ToString(sen.guidance)},
              {"positional_encoding", sen.positional_encoding}};
  j["weights"] = {{"sisnr", weights.sisnr}, {"rec", weights.rec}, {"kl", weights.kl},
                  {"mi", weights.mi},       {"ll", weights.ll},   {"sim", weights.sim}};
  j["optim"] = {{"lr", optim.lr},
                {"lr_approx", optim.lr_approx},
                {"lr_sim", optim.lr_sim},
                {"clip_norm", optim.clip_norm},
                {"batch_size", optim.batch_size},
                {"max_steps", optim.max_steps},
                {"approx_steps", optim.approx_steps},
                {"eval_every", optim.eval_every},
                {"checkpoint_every", optim.checkpoint_every},
                {"patience", optim.patience},
                {"crop_s", optim.crop_s},
                {"eval_limit", optim.eval_limit}};
  j["metric"] = {{"chunk_ms", metric.chunk_ms},
                 {"hop_ms", metric.hop_ms},
                 {"eta", metric.eta},
                 {"strict", metric.strict}};
  return j;
}

RunConfig RunConfig::FromJson(const json &j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto &item : j.items())
    if (!kSections.count(item.key()))
      throw std::invalid_argument("unknown config section '" + item.key() + "'");

  RunConfig c;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned())
      throw std::invalid_argument("config key seed must be a non-negative integer");
    c.seed = j.at("seed").get<uint64_t>();
  }
  {
    SectionReader r(j, "stft");
    r.Read("win_length", &c.stft.win_length);
    r.Read("hop_length", &c.stft.hop_length);
    r.Read("fft_size", &c.stft.fft_size);
    r.Finish();
  }
  {
    SectionReader r(j, "corpus");
    r.Read("speakers", &c.corpus.speakers);
    r.Read("utterances_per_speaker", &c.corpus.utterances_per_speaker);
    r.Read("duration_s", &c.corpus.duration_s);
    r.Read("sample_rate", &c.corpus.sample_rate);
    r.Read("seed", &c.corpus.seed);
    r.Read("snr_low_db", &c.corpus.snr_low_db);
    r.Read("snr_high_db", &c.corpus.snr_high_db);
    r.Read("test_fraction", &c.corpus.test_fraction);
    r.Read("mixtures_per_utterance", &c.corpus.mixtures_per_utterance);
    r.Finish();
  }
  {
    SectionReader r(j, "rsen");
    r.Read("global_dim", &c.rsen.global_dim);
    r.Read("semantic_dim", &c.rsen.semantic_dim);
    r.Read("channels", &c.rsen.channels);
    r.Read("blocks", &c.rsen.blocks);
    r.Read("kernel", &c.rsen.kernel);
    r.Read("downsample_blocks", &c.rsen.downsample_blocks);
    r.Finish();
  }
  {
    SectionReader r(j, "mi");
    r.Read("hidden", &c.mi.hidden);
    r.Read("layers", &c.mi.layers);
    r.Read("logvar_min", &c.mi.logvar_min);
    r.Read("logvar_max", &c.mi.logvar_max);
    r.Finish();
  }
  {
    SectionReader r(j, "gidn");
    r.Read("reduction", &c.gidn.reduction);
    r.Read("literal_similarity_sign", &c.gidn.literal_similarity_sign);
    r.Finish();
  }
  {
    SectionReader r(j, "sen");
    std::string fusion = ToString(c.sen.fusion), guidance = ToString(c.sen.guidance);
    r.Read("feature_dim", &c.sen.feature_dim);
    r.Read("kernel", &c.sen.kernel);
    r.Read("stride", &c.sen.stride);
    r.Read("chunk", &c.sen.chunk);
    r.Read("iterations", &c.sen.iterations);
    r.Read("plain_layers", &c.sen.plain_layers);
    r.Read("heads", &c.sen.heads);
    r.Read("ff_dim", &c.sen.ff_dim);
    r.Read("fusion", &fusion);
    r.Read("guidance", &guidance);
    r.Read("positional_encoding", &c.sen.positional_encoding);
    r.Finish();
    c.sen.fusion = ParseFusionMode(fusion);
    c.sen.guidance = ParseGuidance(guidance);
  }
  {
    SectionReader r(j, "weights");
    r.Read("sisnr", &c.weights.sisnr);
    r.Read("rec", &c.weights.rec);
    r.Read("kl", &c.weights.kl);
    r.Read("mi", &c.weights.mi);
    r.Read("ll", &c.weights.ll);
    r.Read("sim", &c.weights.sim);
    r.Finish();
  }
  {
    SectionReader r(j, "optim");
    r.Read("lr", &c.optim.lr);
    r.Read("lr_approx", &c.optim.lr_approx);
    r.Read("lr_sim", &c.optim.lr_sim);
    r.Read("clip_norm", &c.optim.clip_norm);
    r.Read("batch_size", &c.optim.batch_size);
    r.Read("max_steps", &c.optim.max_steps);
    r.Read("approx_steps", &c.optim.approx_steps);
    r.Read("eval_every", &c.optim.eval_every);
    r.Read("checkpoint_every", &c.optim.checkpoint_every);
    r.Read("patience", &c.optim.patience);
    r.Read("crop_s", &c.optim.crop_s);
    r.Read("eval_limit", &c.optim.eval_limit);
    r.Finish();
  }
  {
    SectionReader r(j, "metric");
    r.Read("chunk_ms", &c.metric.chunk_ms);
    r.Read("hop_ms", &c.metric.hop_ms);
    r.Read("eta", &c.metric.eta);
    r.Read("strict", &c.metric.strict);
    r.Finish();
  }
  c.Resolve();
  c.Check();
  return c;
}

RunConfig RunConfig::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error &e) {
    throw std::invalid_argument("malformed config " + path.string() + ": " + e.what());
  }
  return FromJson(j);
}

std::string RunConfig::ModelHash() const {
  const json full = ToJson();
  json part;
  for (const char *key : {"stft", "rsen", "mi", "gidn", "sen", "weights"}) part[key] = full[key];
  // Object keys are kept sorted, so the dump does not depend on input order.
  return Fnv1aHex(part.dump());
}

void SetConfigValue(json &config, const std::string &dotted_key, const std::string &value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error &) {
    parsed = value;  // bare strings such as z_c+z_s
  }
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos) {
    config[dotted_key] = parsed;
  } else {
    config[dotted_key.substr(0, dot)][dotted_key.substr(dot + 1)] = parsed;
  }
  // Validate eagerly so a bad override names itself.
  RunConfig::FromJson(config);
}

RunConfig DeskScaleConfig() {
  RunConfig c;
  // Two voices, ~200 training triplets; more voices at this size train too
  // slowly for a half-hour budget.
  c.corpus.speakers = 2;
  c.corpus.utterances_per_speaker = 44;
  c.corpus.duration_s = 2.0;
  c.corpus.sample_rate = 8000;
  c.rsen.global_dim = 64;
  c.rsen.semantic_dim = 64;
  c.rsen.channels = 64;
  c.rsen.blocks = 3;
  c.mi.hidden = 64;
  c.sen.feature_dim = 64;
  c.sen.iterations = 1;
  c.sen.plain_layers = 1;
  c.sen.heads = 4;
  c.sen.ff_dim = 128;
  c.optim.max_steps = 2000;
  c.optim.eval_every = 250;
  c.optim.checkpoint_every = 500;
  c.optim.crop_s = 1.0;
  c.Resolve();
  c.Check();
  return c;
}

}  // namespace sdrtse
