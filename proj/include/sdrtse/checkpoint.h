// sdrtse/checkpoint.h

// Copyright 2026  The sdrtse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Versioned binary container: header, config document and its model hash,
// step and RNG states, named parameters, then Adam moments of the three
// optimisers. Integers are little-endian.

#ifndef SDRTSE_CHECKPOINT_H_
#define SDRTSE_CHECKPOINT_H_

#include <filesystem>
#include <memory>
#include <string>

#include "sdrtse/config.h"
#include "sdrtse/training.h"

namespace sdrtse {

inline constexpr uint32_t kCheckpointVersion = 1;

enum class CheckpointMode : uint8_t { kFull = 0, kInference = 1 };

struct CheckpointInfo {
  uint32_t version = 0;
  CheckpointMode mode = CheckpointMode::kFull;
  std::string config_hash;
  RunConfig config;
  int64_t step = 0;
};

// Inference exports drop the decoder, the approximation network and the
// optimiser state; the semantic encoder is kept only when the extractor
// consumes z_c.
void SaveCheckpoint(const TrainState &state, const std::filesystem::path &path,
                    CheckpointMode mode = CheckpointMode::kFull);

CheckpointInfo ReadCheckpointInfo(const std::filesystem::path &path);

// Rebuilds the state from the stored config.
std::unique_ptr<TrainState> LoadCheckpoint(const std::filesystem::path &path);
// Refuses the file unless its model hash equals expected.ModelHash().
std::unique_ptr<TrainState> LoadCheckpoint(const std::filesystem::path &path,
                                           const RunConfig &expected);

}  // namespace sdrtse

#endif  // SDRTSE_CHECKPOINT_H_
