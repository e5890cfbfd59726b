// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "core/labels.hpp"
#include "core/svgplot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace glae::pipeline {

void apply_thread_config(const cfg::RunConfig& rc) {
  tune_runtime_allocator();
  const int threads = rc.get_int("threads");
  require(threads >= 0, ErrorKind::config, "threads must be >= 0");
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
}

namespace {

std::vector<double> mean_dist(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = 0.5 * (a[i] + b[i]);
  return out;
}

// softmax rows of a logits tensor into double distributions
std::vector<std::vector<double>> to_distributions(const nn::Tensor<float>& logits) {
  std::vector<std::vector<double>> out(logits.n);
  for (int s = 0; s < logits.n; ++s) {
    std::vector<float> tmp(logits.c);
    pa::softmax_strided(logits.sample(s), logits.c, size_t{1}, tmp.data(), size_t{1});
    out[s].assign(tmp.begin(), tmp.end());
  }
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec || fs::is_directory(dir), ErrorKind::io, "cannot create directory " + dir);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  require(f.good(), ErrorKind::io, "cannot write " + path);
  f << text;
  require(f.good(), ErrorKind::io, "write failed for " + path);
}

}  // namespace

EvalResults evaluate_model(const cfg::RunConfig& rc, train::TrainedModel& tm,
                           const synth::Dataset& ds) {
  require(tm.net.cfg.K == ds.K(), ErrorKind::invalid_argument,
          "evaluate: checkpoint K does not match dataset");
  require(!ds.test_ids.empty(), ErrorKind::invalid_argument, "evaluate: empty test split");
  const bool symmetric = rc.get_bool("routing.symmetric_kl");
  const auto protocol = rc.protocol_config();

  EvalResults res;
  res.two_heads = tm.net.balanced.has_value();

  const int batch = 64;
  const int n = static_cast<int>(ds.test_ids.size());
  for (int off = 0; off < n; off += batch) {
    const int take = std::min(batch, n - off);
    std::vector<int> ids(ds.test_ids.begin() + off, ds.test_ids.begin() + off + take);
    nn::Tensor<float> x = train::make_eval_batch(ds, ids);
    nn::Tensor<float> xf = nn::flip_horizontal(x);

    nn::Tensor<float> feats = tm.net.backbone.forward(x, false);
    nn::Tensor<float> feats_f = tm.net.backbone.forward(xf, false);

    auto p_v = to_distributions(tm.net.vanilla.forward(feats, false).logits);
    auto p_v_f = to_distributions(tm.net.vanilla.forward(feats_f, false).logits);
    std::vector<std::vector<double>> p_b, p_b_f;
    if (res.two_heads) {
      p_b = to_distributions(tm.net.head(true).forward(feats, false).logits);
      p_b_f = to_distributions(tm.net.head(true).forward(feats_f, false).logits);
    }

    for (int i = 0; i < take; ++i) {
      const auto& sample = ds.samples[ids[i]];
      auto record = [&](const std::vector<double>& dist) {
        metrics::PredictionRecord r;
        r.id = sample.id;
        r.true_age = sample.age;
        r.pred_age = labels::expected_age(dist);
        return r;
      };
      res.vanilla.push_back(record(mean_dist(p_v[i], p_v_f[i])));
      if (!res.two_heads) continue;
      res.balanced.push_back(record(mean_dist(p_b[i], p_b_f[i])));

      const auto small = routing::route(p_v[i], p_v_f[i], p_b[i], p_b_f[i], symmetric,
                                        /*prefer_bigger=*/false);
      const auto big = routing::route(p_v[i], p_v_f[i], p_b[i], p_b_f[i], symmetric,
                                      /*prefer_bigger=*/true);
      metrics::PredictionRecord rs;
      rs.id = sample.id;
      rs.true_age = sample.age;
      rs.pred_age = small.y_hat;
      res.smaller_upsilon.push_back(rs);
      metrics::PredictionRecord rb = rs;
      rb.pred_age = big.y_hat;
      res.bigger_upsilon.push_back(rb);

      RoutingRow row;
      row.id = sample.id;
      row.true_age = sample.age;
      row.upsilon_vanilla = small.upsilon_vanilla;
      row.upsilon_balanced = small.upsilon_balanced;
      row.chosen = small.chosen;
      row.y_hat = small.y_hat;
      res.routing.push_back(row);
    }
  }

  // usage aggregation for the routed policy
  for (const auto& row : res.routing) {
    auto& slot = res.decade_usage[(row.true_age / 10) * 10];
    ++slot.count;
    slot.vanilla += row.chosen == routing::HeadChoice::vanilla;
    for (const auto& range : protocol.report_ranges()) {
      if (!range.contains(row.true_age)) continue;
      auto& rslot = res.range_usage[range.label()];
      ++rslot.count;
      rslot.vanilla += row.chosen == routing::HeadChoice::vanilla;
    }
  }
  return res;
}

void run_generate(const cfg::RunConfig& rc, const std::string& out_dir) {
  apply_thread_config(rc);
  synth::generate_dataset(rc.synth_config(), out_dir);
  rc.write((fs::path(out_dir) / "resolved.config").string());
}

void run_train(const cfg::RunConfig& rc, int stage, const std::string& data_dir,
               const std::string& stage1_ckpt, const std::string& out_ckpt) {
  apply_thread_config(rc);
  require(stage == 1 || stage == 2, ErrorKind::invalid_argument,
          "train: stage must be 1 or 2");
  synth::Dataset ds = synth::load_dataset(data_dir);
  train::TrainedModel tm;
  if (stage == 1) {
    tm = train::train_stage1(rc, ds);
  } else {
    require(!stage1_ckpt.empty(), ErrorKind::invalid_argument,
            "train: stage 2 needs a stage-1 checkpoint (--init)");
    train::TrainedModel parent = train::load_checkpoint(stage1_ckpt);
    tm = train::train_stage2(rc, ds, parent);
  }
  train::save_checkpoint(tm, out_ckpt);
  rc.write(out_ckpt + ".config");
}

namespace {

std::string decade_label(int start) {
  return std::to_string(start) + "-" + std::to_string(start + 9);
}

json usage_entry(const std::string& label, const GroupUsage& u) {
  json g;
  g["label"] = label;
  g["count"] = u.count;
  g["vanilla_ratio"] = u.vanilla_ratio();
  g["balanced_ratio"] = 1.0 - u.vanilla_ratio();
  return g;
}

std::string routing_table_text(const EvalResults& res) {
  std::ostringstream os;
  os << "group      n      vanilla%  balanced%\n";
  char buf[96];
  auto line = [&](const std::string& label, const GroupUsage& u) {
    std::snprintf(buf, sizeof(buf), "%-10s %-6d %8.1f  %9.1f\n", label.c_str(), u.count,
                  100.0 * u.vanilla_ratio(), 100.0 * (1 - u.vanilla_ratio()));
    os << buf;
  };
  for (const auto& [label, u] : res.range_usage) line(label, u);
  for (const auto& [start, u] : res.decade_usage) line(decade_label(start), u);
  return os.str();
}

void write_variant(const std::string& out_dir, const std::string& name,
                   const std::vector<metrics::PredictionRecord>& records,
                   const metrics::ProtocolConfig& protocol) {
  metrics::write_predictions_csv((fs::path(out_dir) / ("predictions_" + name + ".csv")).string(),
                                 records);
  const auto report = metrics::build_report(records, protocol);
  write_text((fs::path(out_dir) / ("report_" + name + ".json")).string(),
             metrics::report_to_json(report));
  write_text((fs::path(out_dir) / ("report_" + name + ".txt")).string(),
             metrics::report_to_text(report));
}

}  // namespace

void run_evaluate(const cfg::RunConfig& rc, const std::string& ckpt,
                  const std::string& data_dir, const std::string& out_dir) {
  apply_thread_config(rc);
  train::TrainedModel tm = train::load_checkpoint(ckpt);
  synth::Dataset ds = synth::load_dataset(data_dir);
  ensure_dir(out_dir);
  const auto protocol = rc.protocol_config();
  EvalResults res = evaluate_model(rc, tm, ds);

  write_variant(out_dir, "vanilla", res.vanilla, protocol);
  if (res.two_heads) {
    write_variant(out_dir, "balanced", res.balanced, protocol);
    write_variant(out_dir, "smaller_upsilon", res.smaller_upsilon, protocol);
    write_variant(out_dir, "bigger_upsilon", res.bigger_upsilon, protocol);

    std::ostringstream csv;
    csv << "id,upsilon_vanilla,upsilon_balanced,chosen,pred_age\n";
    char buf[64];
    for (const auto& row : res.routing) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g", row.upsilon_vanilla,
                    row.upsilon_balanced);
      csv << row.id << "," << buf << "," << routing::head_choice_name(row.chosen) << ",";
      std::snprintf(buf, sizeof(buf), "%.9f", row.y_hat);
      csv << buf << "\n";
    }
    write_text((fs::path(out_dir) / "routing.csv").string(), csv.str());
    write_text((fs::path(out_dir) / "routing.txt").string(), routing_table_text(res));

    json usage;
    json decades = json::array();
    for (const auto& [start, u] : res.decade_usage)
      decades.push_back(usage_entry(decade_label(start), u));
    json ranges = json::array();
    for (const auto& [label, u] : res.range_usage) ranges.push_back(usage_entry(label, u));
    usage["decades"] = std::move(decades);
    usage["ranges"] = std::move(ranges);
    write_text((fs::path(out_dir) / "routing_usage.json").string(), usage.dump(2) + "\n");
  }
  rc.write((fs::path(out_dir) / "resolved.config").string());
}

void run_score(const cfg::RunConfig& rc, const std::string& predictions_csv,
               const std::string& out_dir) {
  // score is pure: reads the csv and protocol only
  const auto records = metrics::read_predictions_csv(predictions_csv);
  const auto report = metrics::build_report(records, rc.protocol_config());
  ensure_dir(out_dir);
  write_text((fs::path(out_dir) / "report.json").string(), metrics::report_to_json(report));
  write_text((fs::path(out_dir) / "report.txt").string(), metrics::report_to_text(report));
  rc.write((fs::path(out_dir) / "resolved.config").string());
}

void run_plot_report(const std::string& report_json, const std::string& out_svg) {
  const auto report = metrics::report_from_json_file(report_json);
  write_text(out_svg, plot::report_svg(report));
}

void run_plot_routing(const std::string& usage_json, const std::string& out_svg) {
  std::ifstream f(usage_json);
  require(f.good(), ErrorKind::io, "cannot open " + usage_json);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::format, std::string("bad routing usage json: ") + e.what());
  }
  std::vector<plot::UsageBar> bars;
  try {
    for (const auto& g : j.at("decades")) {
      plot::UsageBar b;
      b.label = g.at("label").get<std::string>();
      b.count = g.at("count").get<int>();
      b.vanilla_ratio = g.at("vanilla_ratio").get<double>();
      bars.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::format, std::string("routing usage json missing fields: ") + e.what());
  }
  write_text(out_svg, plot::usage_svg(bars));
}

}  // namespace glae::pipeline
