// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Exercises libglae exactly as an external client would: through the C
// header and the shared library only.

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "glae/glae.h"

namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path root;
  Workspace() : root(fs::temp_directory_path() / "glae_capi_ws") {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
  std::string operator/(const std::string& leaf) const { return (root / leaf).string(); }
};

glae_config* tiny_config() {
  glae_config* cfg = nullptr;
  REQUIRE(glae_config_create(&cfg) == GLAE_OK);
  const char* kv[][2] = {
      {"labels.k", "9"},          {"data.image_size", "16"},
      {"data.head_center", "5"},  {"data.head_count", "8"},
      {"data.tail_min", "2"},     {"data.decay", "3.0"},
      {"data.test_fraction", "0.2"}, {"backbone.input_size", "16"},
      {"backbone.widths", "4,8"}, {"backbone.strides", "2,1"},
      {"fr.r", "2"},              {"train.batch_size", "8"},
      {"train.stage1_epochs", "2"}, {"train.stage2_epochs", "1"},
      {"train.lr", "0.02"},       {"seed", "99"},
      {"metrics.head_lo", "3"},   {"metrics.head_hi", "6"},
  };
  for (auto& p : kv) REQUIRE(glae_config_set(cfg, p[0], p[1]) == GLAE_OK);
  return cfg;
}

}  // namespace

TEST_CASE("version and status names are stable strings") {
  CHECK(std::strlen(glae_version()) > 0);
  CHECK(std::string(glae_status_name(GLAE_OK)) == "ok");
  CHECK(std::string(glae_status_name(GLAE_ERR_CONFIG)) == "config");
  CHECK(std::string(glae_status_name(GLAE_ERR_FORMAT)) == "format");
}

TEST_CASE("config surface: set, get, save, load, unknown keys") {
  glae_config* cfg = nullptr;
  REQUIRE(glae_config_create(&cfg) == GLAE_OK);
  CHECK(glae_config_set(cfg, "seed", "777") == GLAE_OK);
  char buf[64];
  CHECK(glae_config_get(cfg, "seed", buf, sizeof(buf)) == GLAE_OK);
  CHECK(std::string(buf) == "777");

  CHECK(glae_config_set(cfg, "not.a.key", "1") == GLAE_ERR_CONFIG);
  CHECK(std::strlen(glae_last_error()) > 0);
  CHECK(glae_config_get(cfg, "also.not.a.key", buf, sizeof(buf)) == GLAE_ERR_CONFIG);

  Workspace ws;
  CHECK(glae_config_save(cfg, (ws / "saved.config").c_str()) == GLAE_OK);
  glae_config* loaded = nullptr;
  CHECK(glae_config_load(&loaded, (ws / "saved.config").c_str()) == GLAE_OK);
  CHECK(glae_config_get(loaded, "seed", buf, sizeof(buf)) == GLAE_OK);
  CHECK(std::string(buf) == "777");
  glae_config_destroy(loaded);
  glae_config_destroy(cfg);

  CHECK(glae_config_load(&loaded, (ws / "missing.config").c_str()) == GLAE_ERR_IO);
  CHECK(glae_config_create(nullptr) == GLAE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("full pipeline through the shared library") {
  Workspace ws;
  glae_config* cfg = tiny_config();

  REQUIRE(glae_generate_dataset(cfg, (ws / "data").c_str()) == GLAE_OK);
  CHECK(fs::exists(ws.root / "data" / "labels.csv"));
  CHECK(fs::exists(ws.root / "data" / "config.snapshot"));
  CHECK(fs::exists(ws.root / "data" / "resolved.config"));

  REQUIRE(glae_train(cfg, 1, (ws / "data").c_str(), nullptr, (ws / "s1.ckpt").c_str()) ==
          GLAE_OK);
  REQUIRE(glae_train(cfg, 2, (ws / "data").c_str(), (ws / "s1.ckpt").c_str(),
                     (ws / "s2.ckpt").c_str()) == GLAE_OK);

  // stage 2 without a parent checkpoint is an input error
  CHECK(glae_train(cfg, 2, (ws / "data").c_str(), nullptr, (ws / "bad.ckpt").c_str()) ==
        GLAE_ERR_INVALID_ARGUMENT);

  glae_model* model = nullptr;
  REQUIRE(glae_model_open(&model, (ws / "s2.ckpt").c_str()) == GLAE_OK);
  CHECK(glae_model_stage(model) == 2);
  CHECK(glae_model_seed(model) == 99);
  CHECK(glae_model_has_balanced_head(model) == 1);
  CHECK(glae_model_categories(model) == 10);

  std::vector<float> image(16 * 16, 0.1f);
  std::vector<double> dist(10, 0.0);
  for (int head : {0, 1}) {
    REQUIRE(glae_model_predict(model, image.data(), 1, 16, 16, head, dist.data()) ==
            GLAE_OK);
    double sum = 0;
    for (double v : dist) { CHECK(v > 0); sum += v; }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(glae_model_predict(model, image.data(), 1, 8, 8, 0, dist.data()) ==
        GLAE_ERR_INVALID_ARGUMENT);
  CHECK(glae_model_predict(model, image.data(), 1, 16, 16, 7, dist.data()) ==
        GLAE_ERR_INVALID_ARGUMENT);
  glae_model_close(model);

  REQUIRE(glae_evaluate(cfg, (ws / "s2.ckpt").c_str(), (ws / "data").c_str(),
                        (ws / "eval").c_str()) == GLAE_OK);
  for (const char* f : {"predictions_vanilla.csv", "predictions_balanced.csv",
                        "predictions_smaller_upsilon.csv", "predictions_bigger_upsilon.csv",
                        "report_vanilla.json", "routing.csv", "routing_usage.json",
                        "resolved.config"})
    CHECK(fs::exists(ws.root / "eval" / f));

  REQUIRE(glae_plot_report((ws / "eval/report_vanilla.json").c_str(),
                           (ws / "fig1.svg").c_str()) == GLAE_OK);
  REQUIRE(glae_plot_routing((ws / "eval/routing_usage.json").c_str(),
                            (ws / "fig4.svg").c_str()) == GLAE_OK);
  for (const char* f : {"fig1.svg", "fig4.svg"}) {
    std::ifstream svg(ws.root / f);
    std::string head;
    std::getline(svg, head);
    CHECK(head.rfind("<svg", 0) == 0);
  }
  glae_config_destroy(cfg);
}

TEST_CASE("score is pure csv-in, report-out") {
  Workspace ws;
  glae_config* cfg = nullptr;
  REQUIRE(glae_config_create(&cfg) == GLAE_OK);
  {
    std::ofstream f(ws / "perfect.csv");
    f << "id,true_age,pred_age\n";
    for (int age : {3, 40, 40, 97}) f << "a" << age << "," << age << "," << age << ".0\n";
  }
  REQUIRE(glae_score(cfg, (ws / "perfect.csv").c_str(), (ws / "scored").c_str()) == GLAE_OK);
  nlohmann::json j;
  std::ifstream in(ws.root / "scored" / "report.json");
  in >> j;
  CHECK(j.at("mae").get<double>() == doctest::Approx(0.0));
  CHECK(j.at("cmae").get<double>() == doctest::Approx(0.0));
  CHECK(j.at("aar").get<double>() == doctest::Approx(10.0));
  CHECK(j.at("n").get<int>() == 4);
  CHECK(j.at("m").get<int>() == 3);

  CHECK(glae_score(cfg, (ws / "nope.csv").c_str(), (ws / "scored2").c_str()) == GLAE_ERR_IO);
  glae_config_destroy(cfg);
}

TEST_CASE("corrupt checkpoints surface as format errors with a message") {
  Workspace ws;
  {
    std::ofstream f(ws / "junk.ckpt", std::ios::binary);
    f << "this is definitely not a checkpoint container, padded well past the header";
  }
  glae_model* model = nullptr;
  CHECK(glae_model_open(&model, (ws / "junk.ckpt").c_str()) == GLAE_ERR_FORMAT);
  CHECK(std::string(glae_last_error()).find("magic") != std::string::npos);
}
