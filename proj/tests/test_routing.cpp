// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "core/labels.hpp"
#include "core/routing.hpp"

using namespace glae;
using routing::HeadChoice;

namespace {

model::Model<float> toy_two_head_model(uint64_t seed) {
  model::ModelConfig mc;
  mc.K = 9;
  mc.backbone.input_size = 16;
  mc.backbone.widths = {4, 8};
  mc.backbone.strides = {2, 1};
  mc.r = 2;
  model::Model<float> net;
  net.build(mc, seed);
  net.add_balanced_head(/*warm_start=*/false, seed);
  return net;
}

nn::Tensor<float> random_image(uint64_t seed) {
  nn::Tensor<float> x(1, 1, 16, 16);
  Rng rng(seed);
  for (auto& v : x.v) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return x;
}

}  // namespace

TEST_CASE("hand-evaluated toy routing decision") {
  const std::vector<double> p_hol = {0.9, 0.1}, p_hol_f = {0.8, 0.2};
  const std::vector<double> p_ban = {0.6, 0.4}, p_ban_f = {0.6, 0.4};
  const auto d = routing::route(p_hol, p_hol_f, p_ban, p_ban_f);
  const double want_u1 = 0.9 * std::log(0.9 / 0.8) + 0.1 * std::log(0.1 / 0.2);
  CHECK(d.upsilon_vanilla == doctest::Approx(want_u1).epsilon(1e-12));
  CHECK(d.upsilon_vanilla == doctest::Approx(0.0367).epsilon(1e-2));
  CHECK(d.upsilon_balanced == doctest::Approx(0.0));
  CHECK(d.chosen == HeadChoice::balanced);
  CHECK(d.p_final[0] == doctest::Approx(0.6));
  CHECK(d.p_final[1] == doctest::Approx(0.4));
  CHECK(d.y_hat == doctest::Approx(0.4));
}

TEST_CASE("zero divergence beats positive, ties go to balanced") {
  const std::vector<double> stable = {0.7, 0.3};
  const std::vector<double> wobbly = {0.6, 0.4}, wobbly_f = {0.5, 0.5};
  const auto d = routing::route(stable, stable, wobbly, wobbly_f);
  CHECK(d.upsilon_vanilla == 0.0);
  CHECK(d.chosen == HeadChoice::vanilla);

  const auto tie = routing::route(stable, stable, wobbly, wobbly);
  CHECK(tie.upsilon_vanilla == tie.upsilon_balanced);
  CHECK(tie.chosen == HeadChoice::balanced);
}

TEST_CASE("anti-policy picks the bigger divergence, ties still balanced") {
  const std::vector<double> a = {0.9, 0.1}, af = {0.7, 0.3};
  const std::vector<double> b = {0.55, 0.45}, bf = {0.5, 0.5};
  const auto small = routing::route(a, af, b, bf);
  const auto big = routing::route(a, af, b, bf, false, /*prefer_bigger=*/true);
  CHECK(small.chosen == HeadChoice::balanced);
  CHECK(big.chosen == HeadChoice::vanilla);
  CHECK(small.upsilon_vanilla == big.upsilon_vanilla);

  const auto tie = routing::route(a, a, b, b, false, true);
  CHECK(tie.chosen == HeadChoice::balanced);
}

TEST_CASE("decision depends only on the upsilon ordering") {
  Rng rng(12);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> ph(5), phf(5), pb(5), pbf(5);
    auto randomize = [&](std::vector<double>& p) {
      double s = 0;
      for (auto& v : p) { v = rng.uniform(0.05, 1.0); s += v; }
      for (auto& v : p) v /= s;
    };
    randomize(ph); randomize(phf); randomize(pb); randomize(pbf);
    const auto base = routing::route(ph, phf, pb, pbf);
    const double gap = std::abs(base.upsilon_vanilla - base.upsilon_balanced);
    if (gap < 1e-6) continue;

    // a temperature rescaling of all four logit vectors changes both upsilon
    // values but preserves their order
    auto temper = [](const std::vector<double>& p) {
      std::vector<double> q(p.size());
      double s = 0;
      for (size_t i = 0; i < p.size(); ++i) { q[i] = std::pow(p[i], 1.2); s += q[i]; }
      for (auto& v : q) v /= s;
      return q;
    };
    const auto warmed = routing::route(temper(ph), temper(phf), temper(pb), temper(pbf));
    CHECK(warmed.chosen == base.chosen);

    // perturbations that move both upsilons by less than half the gap cannot
    // change the decision
    auto nudge = [&](const std::vector<double>& p, double eps) {
      std::vector<double> q = p;
      q[0] += eps;
      q[1] -= eps;
      return q;
    };
    double eps = 1e-7;
    const auto jittered = routing::route(nudge(ph, eps), nudge(phf, -eps),
                                         nudge(pb, eps), nudge(pbf, -eps));
    CHECK(std::abs(jittered.upsilon_vanilla - base.upsilon_vanilla) < gap / 2);
    CHECK(std::abs(jittered.upsilon_balanced - base.upsilon_balanced) < gap / 2);
    CHECK(jittered.chosen == base.chosen);
  }
}

TEST_CASE("final distribution is valid and the age lands in range") {
  Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> ps[4];
    for (auto& p : ps) {
      p.resize(11);
      double s = 0;
      for (auto& v : p) { v = rng.uniform(0.01, 1.0); s += v; }
      for (auto& v : p) v /= s;
    }
    const auto d = routing::route(ps[0], ps[1], ps[2], ps[3]);
    double sum = 0;
    for (double v : d.p_final) { CHECK(v > 0); sum += v; }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.y_hat >= 0.0);
    CHECK(d.y_hat <= 10.0);
  }
}

TEST_CASE("kl orientation is raw-to-flipped; the symmetric option averages both") {
  const std::vector<double> p = {0.8, 0.2}, pf = {0.6, 0.4};
  const std::vector<double> q = {0.5, 0.5};
  const auto d = routing::route(p, pf, q, q);
  CHECK(d.upsilon_vanilla == doctest::Approx(labels::kl_loss(p, pf)).epsilon(1e-12));
  // swapping raw and flipped exposes the KL asymmetry
  const auto swapped = routing::route(pf, p, q, q);
  CHECK(swapped.upsilon_vanilla == doctest::Approx(labels::kl_loss(pf, p)).epsilon(1e-12));
  CHECK(d.upsilon_vanilla != doctest::Approx(swapped.upsilon_vanilla));

  const auto sym = routing::route(p, pf, q, q, /*symmetric_kl=*/true);
  const double want = 0.5 * (labels::kl_loss(p, pf) + labels::kl_loss(pf, p));
  CHECK(sym.upsilon_vanilla == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("predict_pair: symmetric images give identical pair distributions") {
  auto net = toy_two_head_model(31);
  auto x = random_image(5);
  // mirror the left half onto the right so flip(x) == x bitwise
  for (int y = 0; y < 16; ++y)
    for (int a = 0; a < 8; ++a)
      x.v[y * 16 + (15 - a)] = x.v[y * 16 + a];
  const auto [p_raw, p_flip] = routing::predict_pair(net, false, x);
  CHECK(p_raw == p_flip);
}

TEST_CASE("flip is an involution and asymmetric images produce distinct outputs") {
  auto net = toy_two_head_model(32);
  const auto x = random_image(6);
  const auto twice = nn::flip_horizontal(nn::flip_horizontal(x));
  CHECK(twice.v == x.v);

  const auto [p_raw, p_flip] = routing::predict_pair(net, true, x);
  CHECK(p_raw != p_flip);
  const auto other = random_image(7);
  const auto [q_raw, q_flip] = routing::predict_pair(net, true, other);
  CHECK(p_raw != q_raw);
}

TEST_CASE("missing balanced head points the caller at stage 2") {
  model::ModelConfig mc;
  mc.K = 9;
  mc.backbone.input_size = 16;
  mc.backbone.widths = {4, 8};
  mc.backbone.strides = {2, 1};
  mc.r = 2;
  model::Model<float> net;
  net.build(mc, 3);
  try {
    routing::predict_pair(net, true, random_image(1));
    FAIL("expected a state error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::state);
    CHECK(std::string(e.what()).find("stage 2") != std::string::npos);
  }
}
