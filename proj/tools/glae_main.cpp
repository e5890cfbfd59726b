// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// glae command line. Thin shell over the C API:
//   glae gen-data  [--config PATH] [--seed N] [--set k=v]... --out DIR
//   glae train     --stage 1|2 --data DIR [--init CKPT] --out CKPT [...]
//   glae evaluate  --ckpt CKPT --data DIR --out DIR [...]
//   glae score     --predictions CSV --out DIR [...]
//   glae plot      (--report JSON | --routing JSON) --out SVG

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glae/glae.h"

namespace {

struct ConfigGuard {
  glae_config* cfg = nullptr;
  ~ConfigGuard() { glae_config_destroy(cfg); }
};

int die(glae_status st) {
  std::fprintf(stderr, "error: %s: %s\n", glae_status_name(st), glae_last_error());
  return static_cast<int>(st);
}

int build_config(ConfigGuard& guard, const std::string& config_path,
                 const std::string& seed, const std::vector<std::string>& sets) {
  glae_status st = config_path.empty() ? glae_config_create(&guard.cfg)
                                       : glae_config_load(&guard.cfg, config_path.c_str());
  if (st != GLAE_OK) return die(st);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: invalid_argument: --set expects key=value, got '%s'\n",
                   kv.c_str());
      return static_cast<int>(GLAE_ERR_INVALID_ARGUMENT);
    }
    st = glae_config_set(guard.cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (st != GLAE_OK) return die(st);
  }
  if (!seed.empty()) {
    st = glae_config_set(guard.cfg, "seed", seed.c_str());
    if (st != GLAE_OK) return die(st);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glae: long-tailed age estimation benchmark"};
  app.require_subcommand(1);

  std::string config_path, seed, out, data, init_ckpt, ckpt, predictions, report, routing;
  std::vector<std::string> sets;
  int stage = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value lines)");
    cmd->add_option("--seed", seed, "override the global seed");
    cmd->add_option("--set", sets, "override a single config key (key=value)");
  };

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic benchmark dataset");
  add_common(gen);
  gen->add_option("--out", out, "output dataset directory")->required();

  auto* train = app.add_subcommand("train", "run a training stage");
  add_common(train);
  train->add_option("--stage", stage, "training stage (1 or 2)")->required();
  train->add_option("--data", data, "dataset directory")->required();
  train->add_option("--init", init_ckpt, "stage-1 checkpoint (stage 2 only)");
  train->add_option("--out", out, "output checkpoint path")->required();

  auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
  add_common(eval);
  eval->add_option("--ckpt", ckpt, "checkpoint path")->required();
  eval->add_option("--data", data, "dataset directory")->required();
  eval->add_option("--out", out, "output directory")->required();

  auto* score = app.add_subcommand("score", "score a predictions csv");
  add_common(score);
  score->add_option("--predictions", predictions, "predictions csv")->required();
  score->add_option("--out", out, "output directory")->required();

  auto* plot = app.add_subcommand("plot", "render a report or routing-usage figure");
  plot->add_option("--report", report, "metrics report json");
  plot->add_option("--routing", routing, "routing usage json");
  plot->add_option("--out", out, "output svg path")->required();

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed() || train->parsed() || eval->parsed() || score->parsed()) {
    ConfigGuard guard;
    if (int rc = build_config(guard, config_path, seed, sets)) return rc;
    glae_status st = GLAE_OK;
    if (gen->parsed()) {
      st = glae_generate_dataset(guard.cfg, out.c_str());
    } else if (train->parsed()) {
      st = glae_train(guard.cfg, stage, data.c_str(),
                      init_ckpt.empty() ? nullptr : init_ckpt.c_str(), out.c_str());
    } else if (eval->parsed()) {
      st = glae_evaluate(guard.cfg, ckpt.c_str(), data.c_str(), out.c_str());
    } else {
      st = glae_score(guard.cfg, predictions.c_str(), out.c_str());
    }
    return st == GLAE_OK ? 0 : die(st);
  }

  // plot
  if (report.empty() == routing.empty()) {
    std::fprintf(stderr, "error: invalid_argument: plot needs exactly one of --report/--routing\n");
    return static_cast<int>(GLAE_ERR_INVALID_ARGUMENT);
  }
  const glae_status st = report.empty() ? glae_plot_routing(routing.c_str(), out.c_str())
                                        : glae_plot_report(report.c_str(), out.c_str());
  return st == GLAE_OK ? 0 : die(st);
}
