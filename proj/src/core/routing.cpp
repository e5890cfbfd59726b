// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/routing.hpp"

#include "core/labels.hpp"

namespace glae::routing {

std::pair<std::vector<double>, std::vector<double>> predict_pair(
    model::Model<float>& net, bool use_balanced, const nn::Tensor<float>& image) {
  require(image.n == 1, ErrorKind::invalid_argument, "predict_pair: expects one image");
  auto p_raw = net.predict(image, use_balanced);
  nn::Tensor<float> flipped = nn::flip_horizontal(image);
  auto p_flip = net.predict(flipped, use_balanced);
  return {std::move(p_raw[0]), std::move(p_flip[0])};
}

namespace {

double consistency(std::span<const double> raw, std::span<const double> flipped,
                   bool symmetric) {
  const double kl = labels::kl_loss(raw, flipped);
  if (!symmetric) return kl;
  return 0.5 * (kl + labels::kl_loss(flipped, raw));
}

}  // namespace

RoutingDecision route(std::span<const double> p_hol, std::span<const double> p_hol_f,
                      std::span<const double> p_ban, std::span<const double> p_ban_f,
                      bool symmetric_kl, bool prefer_bigger) {
  require(p_hol.size() == p_hol_f.size() && p_ban.size() == p_ban_f.size() &&
              p_hol.size() == p_ban.size(),
          ErrorKind::invalid_argument, "route: distribution length mismatch");
  RoutingDecision d;
  d.upsilon_vanilla = consistency(p_hol, p_hol_f, symmetric_kl);
  d.upsilon_balanced = consistency(p_ban, p_ban_f, symmetric_kl);
  const bool vanilla_wins = prefer_bigger ? d.upsilon_vanilla > d.upsilon_balanced
                                          : d.upsilon_vanilla < d.upsilon_balanced;
  d.chosen = vanilla_wins ? HeadChoice::vanilla : HeadChoice::balanced;
  const auto& a = vanilla_wins ? p_hol : p_ban;
  const auto& b = vanilla_wins ? p_hol_f : p_ban_f;
  d.p_final.resize(a.size());
  for (size_t i = 0; i < a.size(); ++i) d.p_final[i] = 0.5 * (a[i] + b[i]);
  d.y_hat = labels::expected_age(d.p_final);
  return d;
}

}  // namespace glae::routing
