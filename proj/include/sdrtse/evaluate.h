// sdrtse/evaluate.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef SDRTSE_EVALUATE_H_
#define SDRTSE_EVALUATE_H_

#include <filesystem>
#include <string>
#include <vector>

#include "sdrtse/corpus.h"
#include "sdrtse/metrics.h"
#include "sdrtse/model.h"

namespace sdrtse {

// Extracts every manifest entry with the model and scores it. Speaker labels
// only travel into the report.
EvalReport EvaluateModel(SdrTse &model, const Manifest &manifest, const ScMetricConfig &metric,
                         const std::string &label);

// Scores precomputed estimates: est_dir/<target file name> for each entry.
EvalReport EvaluateEstimates(const std::filesystem::path &est_dir, const Manifest &manifest,
                             const ScMetricConfig &metric, const std::string &label);

struct EmbeddingRow {
  std::string id;
  std::string speaker_id;
  std::vector<float> z_c, z_g, z_s;  // time-pooled z_c and z_g; z_s as produced
};

// One row per manifest entry, computed from its reference utterance.
std::vector<EmbeddingRow> ComputeEmbeddings(SdrTse &model, const Manifest &manifest);

// Header row, then comma-separated rows with quoted space-separated vectors.
void WriteEmbeddingTable(const std::filesystem::path &path, const std::vector<EmbeddingRow> &rows,
                         const std::string &config_hash);
std::vector<EmbeddingRow> ReadEmbeddingTable(const std::filesystem::path &path);

// Held-out accuracy of a multinomial logistic-regression probe trained on
// (train_x, train_y) with full-batch gradient descent. Features are
// standardised with training statistics.
double LinearProbeAccuracy(const torch::Tensor &train_x, const std::vector<int64_t> &train_y,
                           const torch::Tensor &test_x, const std::vector<int64_t> &test_y,
                           int steps = 500, double lr = 0.05, double weight_decay = 1e-3);

}  // namespace sdrtse

#endif  // SDRTSE_EVALUATE_H_
