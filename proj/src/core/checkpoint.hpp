// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Single-file checkpoint container (see docs/checkpoint_format.md):
//   magic "GLAE" | u32 version | u32 stage | u64 seed | u64 manifest size |
//   manifest text | raw little-endian float32 parameter blobs
// Parameter blobs appear in the section order declared by the manifest
// ("backbone", "head.vanilla", optionally "head.balanced"); inside a section
// tensors follow the model's fixed parameter enumeration order.

#ifndef GLAE_CORE_CHECKPOINT_HPP
#define GLAE_CORE_CHECKPOINT_HPP

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/model.hpp"

namespace glae::train {

inline constexpr uint32_t kCheckpointVersion = 1;

struct TrainedModel {
  model::Model<float> net;
  int stage = 1;
  uint64_t seed = 0;
  std::vector<double> history_stage1;  // mean training loss per epoch
  std::vector<double> history_stage2;
  cfg::RunConfig config;
};

void save_checkpoint(const TrainedModel& tm, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace glae::train

#endif
