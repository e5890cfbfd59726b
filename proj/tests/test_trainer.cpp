// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>

#include "core/trainer.hpp"

using namespace glae;
namespace fs = std::filesystem;

namespace {

// memorization-scale setup: ages 0..9, ~40 images of 16x16, two-block net
cfg::RunConfig toy_run_config() {
  cfg::RunConfig rc;
  rc.set("labels.k", "9");
  rc.set("data.image_size", "16");
  rc.set("data.head_center", "5");
  rc.set("data.head_count", "8");
  rc.set("data.tail_min", "2");
  rc.set("data.decay", "3.0");
  rc.set("data.test_fraction", "0.2");
  rc.set("backbone.input_size", "16");
  rc.set("backbone.widths", "4,8");
  rc.set("backbone.strides", "2,1");
  rc.set("fr.r", "2");
  rc.set("train.batch_size", "8");
  rc.set("train.stage1_epochs", "6");
  rc.set("train.stage2_epochs", "3");
  rc.set("train.lr", "0.02");
  rc.set("seed", "2024");
  return rc;
}

struct ToyData {
  fs::path dir;
  synth::Dataset ds;
  explicit ToyData(const cfg::RunConfig& rc)
      : dir(fs::temp_directory_path() / "glae_trainer_toy") {
    fs::remove_all(dir);
    synth::generate_dataset(rc.synth_config(), dir.string());
    ds = synth::load_dataset(dir.string());
  }
  ~ToyData() { fs::remove_all(dir); }
};

std::vector<std::vector<float>> collect(model::Model<float>& net, bool include_balanced) {
  nn::ParamSet<float> ps;
  net.backbone.collect_params(ps, "bb");
  net.vanilla.collect_params(ps, "v");
  if (include_balanced && net.balanced.has_value())
    net.head(true).collect_params(ps, "b");
  std::vector<std::vector<float>> out;
  for (auto& p : ps) out.push_back(*p.value);
  return out;
}

}  // namespace

TEST_CASE("stage 1 descends on a memorization-scale dataset") {
  auto rc = toy_run_config();
  ToyData data(rc);
  const auto tm = train::train_stage1(rc, data.ds);
  REQUIRE(tm.history_stage1.size() == 6);
  CHECK(tm.history_stage1.back() < tm.history_stage1.front());
  for (double l : tm.history_stage1) CHECK(std::isfinite(l));

  // after warmup the epoch means decrease, allowing one non-monotone epoch
  int violations = 0;
  for (size_t e = 2; e < tm.history_stage1.size(); ++e)
    violations += tm.history_stage1[e] > tm.history_stage1[e - 1];
  CHECK(violations <= 1);
}

TEST_CASE("zero epochs leaves the initialization untouched") {
  auto rc = toy_run_config();
  rc.set("train.stage1_epochs", "0");
  ToyData data(rc);
  auto tm = train::train_stage1(rc, data.ds);
  model::Model<float> fresh;
  fresh.build(rc.model_config(), rc.seed());
  CHECK(collect(tm.net, false) == collect(fresh, false));
  CHECK(tm.history_stage1.empty());
}

TEST_CASE("identical seeds reproduce identical stage-1 checkpoints bitwise") {
  auto rc = toy_run_config();
  rc.set("train.stage1_epochs", "3");
  ToyData data(rc);
  auto a = train::train_stage1(rc, data.ds);
  auto b = train::train_stage1(rc, data.ds);
  CHECK(collect(a.net, false) == collect(b.net, false));
  CHECK(a.history_stage1 == b.history_stage1);

  auto rc2 = toy_run_config();
  rc2.set("train.stage1_epochs", "3");
  rc2.set("seed", "2025");
  auto c = train::train_stage1(rc2, data.ds);
  CHECK(collect(a.net, false) != collect(c.net, false));
}

TEST_CASE("stage 2 freezes the backbone and isolates the vanilla head") {
  auto rc = toy_run_config();
  rc.set("train.stage1_epochs", "2");
  ToyData data(rc);
  auto s1 = train::train_stage1(rc, data.ds);
  const auto backbone_before = collect(s1.net, false);

  auto s2 = train::train_stage2(rc, data.ds, s1);
  CHECK(s2.stage == 2);
  REQUIRE(s2.net.balanced.has_value());
  CHECK(s2.history_stage2.size() == 3);

  // backbone and vanilla head are bitwise identical to the stage-1 parent
  CHECK(collect(s2.net, false) == backbone_before);
  // the balanced head moved away from its warm start
  nn::ParamSet<float> van, bal;
  s2.net.vanilla.collect_params(van, "v");
  s2.net.head(true).collect_params(bal, "b");
  bool any_diff = false;
  for (size_t i = 0; i < van.size(); ++i) any_diff |= (*van[i].value != *bal[i].value);
  CHECK(any_diff);
}

TEST_CASE("warm start clones the vanilla head, cold start does not") {
  auto rc = toy_run_config();
  rc.set("train.stage1_epochs", "1");
  rc.set("train.stage2_epochs", "0");
  ToyData data(rc);
  auto s1 = train::train_stage1(rc, data.ds);

  auto warm = train::train_stage2(rc, data.ds, s1);
  nn::ParamSet<float> van, bal;
  warm.net.vanilla.collect_params(van, "v");
  warm.net.head(true).collect_params(bal, "b");
  for (size_t i = 0; i < van.size(); ++i) CHECK(*van[i].value == *bal[i].value);

  rc.set("train.balanced_init", "cold");
  auto cold = train::train_stage2(rc, data.ds, s1);
  nn::ParamSet<float> cbal;
  cold.net.head(true).collect_params(cbal, "b");
  bool any_diff = false;
  for (size_t i = 0; i < van.size(); ++i) any_diff |= (*van[i].value != *cbal[i].value);
  CHECK(any_diff);
}

TEST_CASE("stage 2 demands a stage-1 parent") {
  auto rc = toy_run_config();
  rc.set("train.stage1_epochs", "1");
  ToyData data(rc);
  auto s1 = train::train_stage1(rc, data.ds);
  auto s2 = train::train_stage2(rc, data.ds, s1);
  CHECK_THROWS_AS(train::train_stage2(rc, data.ds, s2), Error);
}

TEST_CASE("divergence aborts with the offending batch in the message") {
  auto rc = toy_run_config();
  rc.set("train.lr", "1e9");
  rc.set("train.clip_norm", "0");
  rc.set("train.stage1_epochs", "50");
  ToyData data(rc);
  try {
    train::train_stage1(rc, data.ds);
    WARN("training survived an absurd learning rate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::state);
    CHECK(std::string(e.what()).find("sample ids") != std::string::npos);
    CHECK(std::string(e.what()).find("l_hol") != std::string::npos);
  }
}

TEST_CASE("trained checkpoints survive the container round trip") {
  auto rc = toy_run_config();
  rc.set("train.stage1_epochs", "2");
  ToyData data(rc);
  auto s1 = train::train_stage1(rc, data.ds);
  auto s2 = train::train_stage2(rc, data.ds, s1);

  const auto path = (fs::temp_directory_path() / "glae_trainer_ckpt.bin").string();
  train::save_checkpoint(s2, path);
  auto back = train::load_checkpoint(path);
  CHECK(collect(back.net, true) == collect(s2.net, true));
  CHECK(back.history_stage1 == s2.history_stage1);
  CHECK(back.history_stage2 == s2.history_stage2);
  CHECK(back.stage == 2);
  fs::remove(path);
}

TEST_CASE("gap-linear ablation model trains through the same loop") {
  auto rc = toy_run_config();
  rc.set("model.head", "gap_linear");
  rc.set("train.stage1_epochs", "3");
  rc.set("train.enable_er", "false");  // kl-only ablation row
  ToyData data(rc);
  const auto tm = train::train_stage1(rc, data.ds);
  REQUIRE(tm.history_stage1.size() == 3);
  CHECK(tm.history_stage1.back() < tm.history_stage1.front());
}
