// training/checkpoint.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sdrtse/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>

namespace sdrtse {

namespace fs = std::filesystem;

namespace {

const char kMagic[8] = {'S', 'D', 'R', 'T', 'S', 'E', 'C', 'K'};

class Writer {
 public:
  explicit Writer(const fs::path &path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write checkpoint " + path.string());
  }
  void Bytes(const void *p, size_t n) { out_.write(static_cast<const char *>(p), n); }
  template <typename T>
  void Pod(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    Bytes(&v, sizeof(v));
  }
  void String(const std::string &s) {
    Pod<uint64_t>(s.size());
    Bytes(s.data(), s.size());
  }
  void Tensor(const torch::Tensor &t) {
    auto c = t.detach().contiguous().cpu();
    Pod<int8_t>(static_cast<int8_t>(c.scalar_type()));
    Pod<uint32_t>(c.dim());
    for (auto s : c.sizes()) Pod<int64_t>(s);
    Pod<uint64_t>(c.nbytes());
    Bytes(c.data_ptr(), c.nbytes());
  }
  void Close(const fs::path &path) {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing checkpoint " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const fs::path &path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open checkpoint " + path.string());
  }
  void Bytes(void *p, size_t n) {
    in_.read(static_cast<char *>(p), n);
    if (static_cast<size_t>(in_.gcount()) != n)
      throw std::runtime_error("truncated checkpoint " + path_.string());
  }
  template <typename T>
  T Pod() {
    T v;
    Bytes(&v, sizeof(v));
    return v;
  }
  std::string String() {
    const auto n = Pod<uint64_t>();
    if (n > (uint64_t{1} << 32)) throw std::runtime_error("corrupt checkpoint " + path_.string());
    std::string s(n, '\0');
    Bytes(s.data(), n);
    return s;
  }
  torch::Tensor Tensor() {
    const auto type = static_cast<c10::ScalarType>(Pod<int8_t>());
    const auto dim = Pod<uint32_t>();
    if (dim > 8) throw std::runtime_error("corrupt checkpoint " + path_.string());
    std::vector<int64_t> sizes(dim);
    for (auto &s : sizes) s = Pod<int64_t>();
    const auto nbytes = Pod<uint64_t>();
    auto t = torch::empty(sizes, torch::TensorOptions().dtype(type));
    if (t.nbytes() != nbytes) throw std::runtime_error("corrupt tensor in " + path_.string());
    Bytes(t.data_ptr(), nbytes);
    return t;
  }

 private:
  fs::path path_;
  std::ifstream in_;
};

bool Exported(const std::string &name, CheckpointMode mode, const RunConfig &config) {
  if (mode == CheckpointMode::kFull) return true;
  auto starts = [&](ParamGroup g) { return name.rfind(ToString(g) + ".", 0) == 0; };
  if (starts(ParamGroup::kDecoder) || starts(ParamGroup::kApprox)) return false;
  if (starts(ParamGroup::kSemanticEncoder)) return UsesSequence(config.sen.guidance);
  return true;
}

CheckpointInfo ReadHeader(Reader &r, const fs::path &path) {
  char magic[8];
  r.Bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error(path.string() + " is not a checkpoint");
  CheckpointInfo info;
  info.version = r.Pod<uint32_t>();
  if (info.version != kCheckpointVersion)
    throw std::runtime_error("checkpoint version " + std::to_string(info.version) +
                             " is not supported (expected " +
                             std::to_string(kCheckpointVersion) + ")");
  const auto mode = r.Pod<uint8_t>();
  if (mode > 1) throw std::runtime_error("unknown checkpoint mode in " + path.string());
  info.mode = static_cast<CheckpointMode>(mode);
  info.config_hash = r.String();
  info.config = RunConfig::FromJson(nlohmann::json::parse(r.String()));
  if (info.config.ModelHash() != info.config_hash)
    throw std::runtime_error("checkpoint " + path.string() + " has an inconsistent config hash");
  info.step = r.Pod<int64_t>();
  return info;
}

void WriteMoments(Writer &w, torch::optim::Adam &opt) {
  const auto moments = ExportAdamState(opt);
  w.Pod<uint64_t>(moments.size());
  for (const auto &m : moments) {
    w.Pod<uint8_t>(m.present);
    if (!m.present) continue;
    w.Pod<int64_t>(m.step);
    w.Tensor(m.exp_avg);
    w.Tensor(m.exp_avg_sq);
  }
}

void ReadMoments(Reader &r, torch::optim::Adam &opt) {
  std::vector<AdamMoments> moments(r.Pod<uint64_t>());
  for (auto &m : moments) {
    m.present = r.Pod<uint8_t>() != 0;
    if (!m.present) continue;
    m.step = r.Pod<int64_t>();
    m.exp_avg = r.Tensor();
    m.exp_avg_sq = r.Tensor();
  }
  ImportAdamState(opt, moments);
}

}  // namespace

void SaveCheckpoint(const TrainState &state, const fs::path &path, CheckpointMode mode) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  // Write to a sibling and rename so a crash never leaves a torn file.
  const fs::path tmp = path.string() + ".tmp";
  {
    Writer w(tmp);
    w.Bytes(kMagic, 8);
    w.Pod<uint32_t>(kCheckpointVersion);
    w.Pod<uint8_t>(static_cast<uint8_t>(mode));
    w.String(state.config.ModelHash());
    w.String(state.config.ToJson().dump());
    w.Pod<int64_t>(state.step);

    std::ostringstream rng;
    rng << state.data_rng;
    w.String(rng.str());
    w.Pod<uint64_t>(state.order.size());
    for (auto i : state.order) w.Pod<int64_t>(i);
    w.Pod<int64_t>(state.cursor);
    w.Tensor(state.noise.get_state());
    w.Pod<double>(state.best_val);
    w.Pod<int64_t>(state.best_step);
    w.Pod<int32_t>(state.evals_since_best);

    std::vector<std::pair<std::string, torch::Tensor>> tensors;
    for (const auto &item : state.model->named_parameters())
      if (Exported(item.key(), mode, state.config)) tensors.emplace_back(item.key(), item.value());
    w.Pod<uint64_t>(tensors.size());
    for (const auto &[name, t] : tensors) {
      w.String(name);
      w.Tensor(t);
    }
    if (mode == CheckpointMode::kFull) {
      WriteMoments(w, *state.approx_opt);
      WriteMoments(w, *state.main_opt);
      WriteMoments(w, *state.sim_opt);
    }
    w.Close(tmp);
  }
  fs::rename(tmp, path);
}

CheckpointInfo ReadCheckpointInfo(const fs::path &path) {
  Reader r(path);
  return ReadHeader(r, path);
}

std::unique_ptr<TrainState> LoadCheckpoint(const fs::path &path) {
  Reader r(path);
  const CheckpointInfo info = ReadHeader(r, path);
  auto state = std::make_unique<TrainState>(info.config);
  state->step = info.step;

  std::istringstream rng(r.String());
  rng >> state->data_rng;
  if (!rng) throw std::runtime_error("corrupt sampler state in " + path.string());
  state->order.resize(r.Pod<uint64_t>());
  for (auto &i : state->order) i = r.Pod<int64_t>();
  state->cursor = r.Pod<int64_t>();
  state->noise.set_state(r.Tensor());
  state->best_val = r.Pod<double>();
  state->best_step = r.Pod<int64_t>();
  state->evals_since_best = r.Pod<int32_t>();

  auto params = state->model->named_parameters();
  const auto count = r.Pod<uint64_t>();
  size_t expected = 0;
  for (const auto &item : params)
    if (Exported(item.key(), info.mode, info.config)) ++expected;
  if (count != expected)
    throw std::runtime_error("checkpoint " + path.string() + " holds " + std::to_string(count) +
                             " tensors, model expects " + std::to_string(expected));
  torch::NoGradGuard no_grad;
  for (uint64_t i = 0; i < count; ++i) {
    const std::string name = r.String();
    auto t = r.Tensor();
    auto *p = params.find(name);
    if (p == nullptr) throw std::runtime_error("unexpected tensor '" + name + "' in checkpoint");
    if (p->sizes() != t.sizes() || p->scalar_type() != t.scalar_type())
      throw std::runtime_error("tensor '" + name + "' does not match the model");
    p->copy_(t);
  }
  if (info.mode == CheckpointMode::kFull) {
    ReadMoments(r, *state->approx_opt);
    ReadMoments(r, *state->main_opt);
    ReadMoments(r, *state->sim_opt);
  } else {
    state->inference_only = true;
  }
  return state;
}

std::unique_ptr<TrainState> LoadCheckpoint(const fs::path &path, const RunConfig &expected) {
  const auto info = ReadCheckpointInfo(path);
  const auto want = expected.ModelHash();
  if (info.config_hash != want)
    throw std::runtime_error("checkpoint/config mismatch: " + path.string() + " was trained with config " +
                             info.config_hash + ", current config is " + want);
  auto state = LoadCheckpoint(path);
  // Non-model settings (step budget, evaluation cadence) follow the caller.
  state->config.corpus = expected.corpus;
  state->config.optim = expected.optim;
  state->config.metric = expected.metric;
  auto set_lr = [](torch::optim::Adam &opt, double lr) {
    static_cast<torch::optim::AdamOptions &>(opt.param_groups().at(0).options()).lr(lr);
  };
  set_lr(*state->approx_opt, expected.optim.lr_approx);
  set_lr(*state->main_opt, expected.optim.lr);
  set_lr(*state->sim_opt, expected.optim.lr_sim);
  return state;
}

}  // namespace sdrtse
