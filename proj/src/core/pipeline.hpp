// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// High-level operations behind the public API: dataset generation, the two
// training stages, evaluation (all four routing variants in one pass),
// scoring of prediction files, and figure emission.

#ifndef GLAE_CORE_PIPELINE_HPP
#define GLAE_CORE_PIPELINE_HPP

#include <map>
#include <string>
#include <vector>

#include "core/routing.hpp"
#include "core/trainer.hpp"

namespace glae::pipeline {

void apply_thread_config(const cfg::RunConfig& rc);

struct RoutingRow {
  std::string id;
  int true_age = 0;
  double upsilon_vanilla = 0;
  double upsilon_balanced = 0;
  routing::HeadChoice chosen = routing::HeadChoice::balanced;
  double y_hat = 0;
};

struct GroupUsage {
  int count = 0;
  int vanilla = 0;
  double vanilla_ratio() const { return count ? static_cast<double>(vanilla) / count : 0.0; }
};

struct EvalResults {
  bool two_heads = false;
  // per-variant predictions over the test split; vanilla/balanced are
  // flip-averaged single-head outputs, smaller/bigger the two routing policies
  std::vector<metrics::PredictionRecord> vanilla;
  std::vector<metrics::PredictionRecord> balanced;
  std::vector<metrics::PredictionRecord> smaller_upsilon;
  std::vector<metrics::PredictionRecord> bigger_upsilon;
  std::vector<RoutingRow> routing;
  std::map<int, GroupUsage> decade_usage;         // keyed by decade start age
  std::map<std::string, GroupUsage> range_usage;  // protocol head/tail ranges
};

EvalResults evaluate_model(const cfg::RunConfig& rc, train::TrainedModel& tm,
                           const synth::Dataset& ds);

void run_generate(const cfg::RunConfig& rc, const std::string& out_dir);

void run_train(const cfg::RunConfig& rc, int stage, const std::string& data_dir,
               const std::string& stage1_ckpt, const std::string& out_ckpt);

void run_evaluate(const cfg::RunConfig& rc, const std::string& ckpt,
                  const std::string& data_dir, const std::string& out_dir);

void run_score(const cfg::RunConfig& rc, const std::string& predictions_csv,
               const std::string& out_dir);

void run_plot_report(const std::string& report_json, const std::string& out_svg);

void run_plot_routing(const std::string& usage_json, const std::string& out_svg);

}  // namespace glae::pipeline

#endif
