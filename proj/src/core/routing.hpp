// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Adaptive routing between the vanilla and balanced heads. Each head scores
// an image and its horizontal mirror; the per-head flip consistency is the
// KL divergence from the raw-image distribution to the flipped one, and the
// head with the smaller divergence wins (ties go to the balanced head). The
// final prediction averages the chosen head's raw and flipped distributions.

#ifndef GLAE_CORE_ROUTING_HPP
#define GLAE_CORE_ROUTING_HPP

#include <span>
#include <utility>
#include <vector>

#include "core/model.hpp"

namespace glae::routing {

enum class HeadChoice { vanilla, balanced };

inline const char* head_choice_name(HeadChoice h) {
  return h == HeadChoice::vanilla ? "vanilla" : "balanced";
}

struct RoutingDecision {
  double upsilon_vanilla = 0;  // KL(p_raw || p_flipped), vanilla head
  double upsilon_balanced = 0;
  HeadChoice chosen = HeadChoice::balanced;
  std::vector<double> p_final;
  double y_hat = 0;
};

// Holistic distributions for one image and its mirror through one head.
// Requires a loaded model; use_balanced demands a stage-2 checkpoint.
std::pair<std::vector<double>, std::vector<double>> predict_pair(
    model::Model<float>& net, bool use_balanced, const nn::Tensor<float>& image);

// prefer_bigger selects the anti-policy (larger divergence wins) used as the
// routing control experiment; ties route to balanced under both policies.
RoutingDecision route(std::span<const double> p_hol, std::span<const double> p_hol_f,
                      std::span<const double> p_ban, std::span<const double> p_ban_f,
                      bool symmetric_kl = false, bool prefer_bigger = false);

}  // namespace glae::routing

#endif
