// training/evaluate.cc

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sdrtse/evaluate.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdrtse {

namespace fs = std::filesystem;

namespace {

std::vector<float> ToVector(const torch::Tensor &t) {
  auto c = t.detach().to(torch::kFloat32).contiguous();
  return {c.data_ptr<float>(), c.data_ptr<float>() + c.numel()};
}

UtteranceMetrics Score(const ManifestEntry &e, std::span<const float> estimate,
                       const Waveform &target, const Waveform &mixture,
                       const ScMetricConfig &metric) {
  auto u = EvaluateUtterance(estimate, target.view(), mixture.view(), mixture.sample_rate, metric);
  u.id = e.mixture_path.stem().string();
  u.speaker_id = e.speaker_id;
  return u;
}

}  // namespace

EvalReport EvaluateModel(SdrTse &model, const Manifest &manifest, const ScMetricConfig &metric,
                         const std::string &label) {
  torch::NoGradGuard no_grad;
  EvalReport report;
  report.label = label;
  report.config_hash = model->config().ModelHash();
  report.sc = metric;
  for (const auto &e : manifest) {
    const Waveform mix = ReadWav(e.mixture_path);
    const Waveform tgt = ReadWav(e.target_path);
    const Waveform ref = ReadWav(e.reference_path);
    if (mix.size() != tgt.size())
      throw std::runtime_error("mixture and target lengths differ for " + e.mixture_path.string());
    auto est = model->Extract(mix.ToTensor().unsqueeze(0), ref.ToTensor().unsqueeze(0));
    const auto samples = ToVector(est[0]);
    report.utterances.push_back(Score(e, samples, tgt, mix, metric));
  }
  return report;
}

EvalReport EvaluateEstimates(const fs::path &est_dir, const Manifest &manifest,
                             const ScMetricConfig &metric, const std::string &label) {
  EvalReport report;
  report.label = label;
  report.config_hash = "estimates";
  report.sc = metric;
  for (const auto &e : manifest) {
    const Waveform mix = ReadWav(e.mixture_path);
    const Waveform tgt = ReadWav(e.target_path);
    const Waveform est = ReadWav(est_dir / e.target_path.filename());
    if (est.size() != tgt.size())
      throw std::runtime_error("estimate length differs for " + e.target_path.filename().string());
    report.utterances.push_back(Score(e, est.view(), tgt, mix, metric));
  }
  return report;
}

std::vector<EmbeddingRow> ComputeEmbeddings(SdrTse &model, const Manifest &manifest) {
  torch::NoGradGuard no_grad;
  std::vector<EmbeddingRow> rows;
  for (const auto &e : manifest) {
    const Waveform ref = ReadWav(e.reference_path);
    auto enc = model->EncodeReference(ref.ToTensor().unsqueeze(0), /*deterministic=*/true);
    EmbeddingRow row;
    row.id = e.reference_path.stem().string();
    row.speaker_id = e.speaker_id;
    row.z_c = ToVector(enc.pooled_c[0]);
    row.z_g = ToVector(enc.pooled_g[0]);
    row.z_s = ToVector(enc.gidn.embedding[0]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteEmbeddingTable(const fs::path &path, const std::vector<EmbeddingRow> &rows,
                         const std::string &config_hash) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(9);
  auto vec = [&](const std::vector<float> &v) {
    out << '"';
    for (size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
    out << '"';
  };
  out << "id,speaker_id,config_hash,z_c,z_g,z_s\n";
  for (const auto &r : rows) {
    out << r.id << ',' << r.speaker_id << ',' << config_hash << ',';
    vec(r.z_c);
    out << ',';
    vec(r.z_g);
    out << ',';
    vec(r.z_s);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<EmbeddingRow> ReadEmbeddingTable(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "id,speaker_id,config_hash,z_c,z_g,z_s")
    throw std::runtime_error("unexpected embedding table header in " + path.string());
  std::vector<EmbeddingRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (fields.size() != 6) throw std::runtime_error("malformed embedding row in " + path.string());
    auto parse = [](const std::string &s) {
      std::vector<float> v;
      std::istringstream is(s);
      float x;
      while (is >> x) v.push_back(x);
      return v;
    };
    rows.push_back({fields[0], fields[1], parse(fields[3]), parse(fields[4]), parse(fields[5])});
  }
  return rows;
}

double LinearProbeAccuracy(const torch::Tensor &train_x, const std::vector<int64_t> &train_y,
                           const torch::Tensor &test_x, const std::vector<int64_t> &test_y,
                           int steps, double lr, double weight_decay) {
  if (train_x.size(0) != static_cast<int64_t>(train_y.size()) ||
      test_x.size(0) != static_cast<int64_t>(test_y.size()) || test_y.empty())
    throw std::invalid_argument("probe features and labels are not paired");
  torch::NoGradGuard outer;
  auto x = train_x.to(torch::kFloat64);
  auto mean = x.mean(0, true);
  auto std = x.std(0, /*unbiased=*/false, true) + 1e-8;
  x = (x - mean) / std;
  auto xt = (test_x.to(torch::kFloat64) - mean) / std;
  int64_t classes = 0;
  for (auto y : train_y) classes = std::max(classes, y + 1);
  for (auto y : test_y) classes = std::max(classes, y + 1);
  auto y = torch::tensor(train_y, torch::kLong);
  auto w = torch::zeros({x.size(1), classes}, torch::kFloat64);
  auto b = torch::zeros({classes}, torch::kFloat64);
  // Plain gradient descent on the convex objective: deterministic, no RNG.
  auto onehot = torch::one_hot(y, classes).to(torch::kFloat64);
  const double n = static_cast<double>(x.size(0));
  for (int s = 0; s < steps; ++s) {
    auto p = torch::softmax(x.matmul(w) + b, 1);
    auto diff = (p - onehot) / n;
    w -= lr * (x.t().matmul(diff) + weight_decay * w);
    b -= lr * diff.sum(0);
  }
  auto pred = (xt.matmul(w) + b).argmax(1);
  auto truth = torch::tensor(test_y, torch::kLong);
  return (pred == truth).to(torch::kFloat64).mean().item<double>();
}

}  // namespace sdrtse
