// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/config.hpp"

#include <fstream>
#include <sstream>

#include "core/common.hpp"

namespace glae::cfg {

namespace {

struct Entry {
  const char* key;
  const char* value;
};

// every knob, with its default
const Entry kRegistry[] = {
    {"seed", "1234"},
    {"threads", "0"},  // 0 = runtime default
    // label distributions
    {"labels.k", "100"},
    {"labels.sigma", "1.0"},
    // synthetic benchmark
    {"data.image_size", "64"},
    {"data.head_center", "35"},
    {"data.head_count", "1000"},
    {"data.tail_min", "10"},
    {"data.decay", "8.0"},
    {"data.noise", "8.0"},
    {"data.noise_dc", "6.0"},
    {"data.noise_tilt", "10.0"},
    {"data.ring_amplitude", "42.0"},
    {"data.ring_jitter", "1.5"},
    {"data.lum_min", "45.0"},
    {"data.lum_max", "205.0"},
    {"data.test_fraction", "0.1"},
    // backbone
    {"backbone.input_channels", "1"},
    {"backbone.input_size", "64"},
    {"backbone.widths", "16,32,64,128"},
    {"backbone.strides", "2,2,2,1"},
    // classifier head
    {"model.head", "glae"},  // glae | gap_linear (ablation baseline)
    {"fr.r", "8"},
    {"fr.kernel", "0"},  // 0 = r
    {"fr.stride", "0"},  // 0 = r
    {"pa.proj_depth", "0"},
    {"pa.proj_width", "512"},
    {"pa.local_weight", "1.0"},
    {"pa.holistic_weight", "1.0"},
    // training
    {"train.batch_size", "32"},
    {"train.stage1_epochs", "8"},
    {"train.stage2_epochs", "4"},
    {"train.lr", "0.01"},
    {"train.stage2_lr", "0.005"},
    {"train.momentum", "0.9"},
    {"train.nesterov", "true"},
    {"train.warmup_frac", "0.1"},
    {"train.clip_norm", "5.0"},
    {"train.enable_er", "true"},  // false reproduces the kl-only ablation
    {"train.aug_flip", "true"},
    {"train.aug_noise", "0.05"},
    {"train.aug_tilt", "0.15"},
    {"train.balanced_init", "warm"},  // warm | cold
    // adaptive routing
    {"routing.symmetric_kl", "false"},
    // evaluation protocol
    {"metrics.head_lo", "18"},
    {"metrics.head_hi", "65"},
    {"metrics.aar_group_width", "10"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& e : kRegistry) {
    values_[e.key] = e.value;
    order_.push_back(e.key);
  }
}

RunConfig RunConfig::from_file(const std::string& path) {
  RunConfig cfg;
  cfg.apply_file(path);
  return cfg;
}

void RunConfig::apply_file(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), ErrorKind::io, "cannot open config file " + path);
  std::string line;
  int row = 0;
  while (std::getline(f, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    require(eq != std::string::npos, ErrorKind::config,
            path + ":" + std::to_string(row) + ": expected 'key = value'");
    set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

bool RunConfig::known(const std::string& key) const { return values_.count(key) > 0; }

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  require(it != values_.end(), ErrorKind::config, "unknown config key '" + key + "'");
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  require(it != values_.end(), ErrorKind::config, "unknown config key '" + key + "'");
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  const std::string& s = get(key);
  size_t pos = 0;
  int v = 0;
  try { v = std::stoi(s, &pos); } catch (const std::exception&) { pos = 0; }
  require(pos > 0 && pos == s.size(), ErrorKind::config,
          "config key '" + key + "' is not an integer: " + s);
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& s = get(key);
  size_t pos = 0;
  double v = 0;
  try { v = std::stod(s, &pos); } catch (const std::exception&) { pos = 0; }
  require(pos > 0 && pos == s.size(), ErrorKind::config,
          "config key '" + key + "' is not a number: " + s);
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorKind::config, "config key '" + key + "' is not a boolean: " + v);
}

uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& s = get(key);
  size_t pos = 0;
  uint64_t v = 0;
  try { v = std::stoull(s, &pos); } catch (const std::exception&) { pos = 0; }
  require(pos > 0 && pos == s.size(), ErrorKind::config,
          "config key '" + key + "' is not an unsigned integer: " + s);
  return v;
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  std::istringstream ss(get(key));
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stoi(trim(part)));
    } catch (const std::exception&) {
      fail(ErrorKind::config, "config key '" + key + "' has a bad list entry: " + part);
    }
  }
  require(!out.empty(), ErrorKind::config, "config key '" + key + "' must be a non-empty list");
  return out;
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  for (const auto& k : order_) os << k << " = " << values_.at(k) << "\n";
  return os.str();
}

void RunConfig::write(const std::string& path) const {
  std::ofstream f(path);
  require(f.good(), ErrorKind::io, "cannot write config to " + path);
  f << serialize();
  require(f.good(), ErrorKind::io, "write failed for " + path);
}

synth::SynthConfig RunConfig::synth_config() const {
  synth::SynthConfig s;
  s.K = get_int("labels.k");
  s.image_size = get_int("data.image_size");
  s.noise = get_double("data.noise");
  s.noise_dc = get_double("data.noise_dc");
  s.noise_tilt = get_double("data.noise_tilt");
  s.ring_amplitude = get_double("data.ring_amplitude");
  s.ring_jitter = get_double("data.ring_jitter");
  s.lum_min = get_double("data.lum_min");
  s.lum_max = get_double("data.lum_max");
  s.profile.head_center = get_int("data.head_center");
  s.profile.head_count = get_int("data.head_count");
  s.profile.tail_min = get_int("data.tail_min");
  s.profile.decay = get_double("data.decay");
  s.seed = get_u64("seed");
  s.test_fraction = get_double("data.test_fraction");
  return s;
}

model::ModelConfig RunConfig::model_config() const {
  model::ModelConfig m;
  m.K = get_int("labels.k");
  m.backbone.input_channels = get_int("backbone.input_channels");
  m.backbone.input_size = get_int("backbone.input_size");
  m.backbone.widths = get_int_list("backbone.widths");
  m.backbone.strides = get_int_list("backbone.strides");
  m.head = model::head_kind_from_name(get("model.head"));
  m.r = get_int("fr.r");
  m.fr_conv.kernel = get_int("fr.kernel");
  m.fr_conv.stride = get_int("fr.stride");
  m.proj_depth = get_int("pa.proj_depth");
  m.proj_width = get_int("pa.proj_width");
  return m;
}

metrics::ProtocolConfig RunConfig::protocol_config() const {
  metrics::ProtocolConfig p;
  p.K = get_int("labels.k");
  p.head = {get_int("metrics.head_lo"), get_int("metrics.head_hi")};
  p.tails.clear();
  if (p.head.lo > 0) p.tails.push_back({0, p.head.lo - 1});
  if (p.head.hi < p.K) p.tails.push_back({p.head.hi + 1, p.K});
  p.aar_group_width = get_int("metrics.aar_group_width");
  return p;
}

}  // namespace glae::cfg
