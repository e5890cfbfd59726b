// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/config.hpp"

using namespace glae;
namespace fs = std::filesystem;

TEST_CASE("defaults are registered and typed getters parse them") {
  cfg::RunConfig rc;
  CHECK(rc.get_int("labels.k") == 100);
  CHECK(rc.get_double("labels.sigma") == doctest::Approx(1.0));
  CHECK(rc.get_bool("train.enable_er"));
  CHECK(rc.get_u64("seed") == 1234);
  CHECK(rc.get_int_list("backbone.widths") == std::vector<int>{16, 32, 64, 128});
}

TEST_CASE("unknown keys are rejected on set and on load") {
  cfg::RunConfig rc;
  CHECK_THROWS_AS(rc.set("train.typo_key", "1"), Error);
  CHECK_THROWS_AS(rc.get("no.such.key"), Error);

  const auto path = (fs::temp_directory_path() / "glae_cfg_unknown.config").string();
  {
    std::ofstream f(path);
    f << "seed = 9\nmystery = 1\n";
  }
  CHECK_THROWS_AS(cfg::RunConfig::from_file(path), Error);
  fs::remove(path);
}

TEST_CASE("config files support comments, blanks and whitespace") {
  const auto path = (fs::temp_directory_path() / "glae_cfg_ok.config").string();
  {
    std::ofstream f(path);
    f << "# a comment\n\n  seed = 42   # trailing comment\n"
      << "train.lr=0.25\n  fr.r   =  4 \n";
  }
  const auto rc = cfg::RunConfig::from_file(path);
  CHECK(rc.get_u64("seed") == 42);
  CHECK(rc.get_double("train.lr") == doctest::Approx(0.25));
  CHECK(rc.get_int("fr.r") == 4);
  fs::remove(path);
}

TEST_CASE("malformed values and lines produce config errors") {
  cfg::RunConfig rc;
  rc.set("train.lr", "fast");
  CHECK_THROWS_AS(rc.get_double("train.lr"), Error);
  rc.set("train.batch_size", "32x");
  CHECK_THROWS_AS(rc.get_int("train.batch_size"), Error);
  rc.set("train.nesterov", "maybe");
  CHECK_THROWS_AS(rc.get_bool("train.nesterov"), Error);

  const auto path = (fs::temp_directory_path() / "glae_cfg_bad.config").string();
  {
    std::ofstream f(path);
    f << "justakeywithoutvalue\n";
  }
  CHECK_THROWS_AS(cfg::RunConfig::from_file(path), Error);
  fs::remove(path);
}

TEST_CASE("serialized config reloads to the same values") {
  cfg::RunConfig rc;
  rc.set("seed", "31337");
  rc.set("data.noise", "3.25");
  rc.set("model.head", "gap_linear");
  const auto path = (fs::temp_directory_path() / "glae_cfg_rt.config").string();
  rc.write(path);
  const auto back = cfg::RunConfig::from_file(path);
  for (const auto& key : rc.keys()) CHECK(back.get(key) == rc.get(key));
  fs::remove(path);
}

TEST_CASE("typed views assemble the module configs") {
  cfg::RunConfig rc;
  rc.set("data.head_count", "50");
  rc.set("data.tail_min", "3");
  const auto sc = rc.synth_config();
  CHECK(sc.profile.head_count == 50);
  CHECK(sc.profile.tail_min == 3);
  CHECK(sc.K == 100);
  CHECK(sc.seed == 1234);

  const auto mc = rc.model_config();
  CHECK(mc.K == 100);
  CHECK(mc.r == 8);
  CHECK(mc.head == model::HeadKind::glae);
  CHECK_NOTHROW(mc.validate());

  const auto pc = rc.protocol_config();
  CHECK(pc.head.lo == 18);
  CHECK(pc.head.hi == 65);
  CHECK(pc.tails.size() == 2);
  CHECK_NOTHROW(pc.validate());
}

TEST_CASE("head range edges collapse tails coherently") {
  cfg::RunConfig rc;
  rc.set("metrics.head_lo", "0");
  const auto pc = rc.protocol_config();
  CHECK(pc.tails.size() == 1);
  CHECK(pc.tails[0].lo == 66);
  CHECK_NOTHROW(pc.validate());
}
