// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat `key = value` run configuration. Every tunable default lives in the
// registry below; setting or loading an unknown key is an error so typos
// cannot silently fall back to defaults. Each command writes its fully
// resolved configuration next to its outputs.

#ifndef GLAE_CORE_CONFIG_HPP
#define GLAE_CORE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/synth.hpp"

namespace glae::cfg {

class RunConfig {
public:
  RunConfig();  // registry defaults

  static RunConfig from_file(const std::string& path);
  void apply_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool known(const std::string& key) const;

  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  uint64_t get_u64(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // resolved text, keys in registry order
  std::string serialize() const;
  void write(const std::string& path) const;

  const std::vector<std::string>& keys() const { return order_; }

  // typed views over the flat keys
  uint64_t seed() const { return get_u64("seed"); }
  synth::SynthConfig synth_config() const;
  model::ModelConfig model_config() const;
  metrics::ProtocolConfig protocol_config() const;

private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace glae::cfg

#endif
