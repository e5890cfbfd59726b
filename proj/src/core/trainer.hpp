// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-stage training loop. Stage 1 trains backbone + vanilla head end-to-end
// with instance-balanced sampling; stage 2 freezes the backbone (eval-mode
// forward, parameters and running stats untouched) and trains a balanced head
// with class-balanced sampling. Identical config + seed reproduces identical
// checkpoints bit for bit.

#ifndef GLAE_CORE_TRAINER_HPP
#define GLAE_CORE_TRAINER_HPP

#include <span>

#include "core/checkpoint.hpp"
#include "core/synth.hpp"

namespace glae::train {

TrainedModel train_stage1(const cfg::RunConfig& rc, const synth::Dataset& ds);

TrainedModel train_stage2(const cfg::RunConfig& rc, const synth::Dataset& ds,
                          const TrainedModel& stage1);

// Normalized image batch for the given dataset sample indices (no
// augmentation; used for evaluation).
nn::Tensor<float> make_eval_batch(const synth::Dataset& ds, std::span<const int> sample_ids);

}  // namespace glae::train

#endif
