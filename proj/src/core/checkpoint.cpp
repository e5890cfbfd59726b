// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace glae::train {

namespace {

constexpr char kMagic[4] = {'G', 'L', 'A', 'E'};

std::string join_history(const std::vector<double>& h) {
  std::ostringstream os;
  char buf[48];
  for (size_t i = 0; i < h.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", h[i]);
    if (i) os << ",";
    os << buf;
  }
  return os.str();
}

std::vector<double> parse_history(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::istringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::stod(part));
  return out;
}

size_t section_float_count(const nn::ParamSet<float>& ps) {
  size_t total = 0;
  for (const auto& p : ps) total += p.value->size();
  return total;
}

template <class Writer>
void for_each_section(model::Model<float>& net,
                      const std::vector<std::string>& names, Writer&& fn) {
  for (const auto& name : names) {
    nn::ParamSet<float> ps;
    if (name == "backbone") net.backbone.collect_params(ps, "backbone");
    else if (name == "head.vanilla") net.vanilla.collect_params(ps, "head.vanilla");
    else if (name == "head.balanced") net.head(true).collect_params(ps, "head.balanced");
    else fail(ErrorKind::format, "checkpoint: unknown section '" + name + "'");
    fn(name, ps);
  }
}

}  // namespace

void save_checkpoint(const TrainedModel& tm, const std::string& path) {
  auto& net = const_cast<model::Model<float>&>(tm.net);
  std::vector<std::string> sections = {"backbone", "head.vanilla"};
  if (tm.net.balanced.has_value()) sections.push_back("head.balanced");

  std::ostringstream manifest;
  manifest << "sections = ";
  for (size_t i = 0; i < sections.size(); ++i)
    manifest << (i ? "," : "") << sections[i];
  manifest << "\n";
  for_each_section(net, sections, [&](const std::string& name, nn::ParamSet<float>& ps) {
    manifest << "section." << name << ".floats = " << section_float_count(ps) << "\n";
  });
  manifest << "history.stage1 = " << join_history(tm.history_stage1) << "\n";
  manifest << "history.stage2 = " << join_history(tm.history_stage2) << "\n";
  for (const auto& key : tm.config.keys())
    manifest << "config." << key << " = " << tm.config.get(key) << "\n";
  const std::string mtext = manifest.str();

  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::io, "cannot write checkpoint " + path);
  f.write(kMagic, 4);
  const uint32_t version = kCheckpointVersion;
  const uint32_t stage = static_cast<uint32_t>(tm.stage);
  const uint64_t seed = tm.seed;
  const uint64_t msize = mtext.size();
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&stage), 4);
  f.write(reinterpret_cast<const char*>(&seed), 8);
  f.write(reinterpret_cast<const char*>(&msize), 8);
  f.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));
  for_each_section(net, sections, [&](const std::string&, nn::ParamSet<float>& ps) {
    for (const auto& p : ps)
      f.write(reinterpret_cast<const char*>(p.value->data()),
              static_cast<std::streamsize>(p.value->size() * sizeof(float)));
  });
  require(f.good(), ErrorKind::io, "write failed for checkpoint " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::io, "cannot open checkpoint " + path);
  char magic[4];
  uint32_t version = 0, stage = 0;
  uint64_t seed = 0, msize = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&stage), 4);
  f.read(reinterpret_cast<char*>(&seed), 8);
  f.read(reinterpret_cast<char*>(&msize), 8);
  require(f.good(), ErrorKind::format, "checkpoint truncated (header): " + path);
  require(std::memcmp(magic, kMagic, 4) == 0, ErrorKind::format,
          "not a checkpoint file (bad magic): " + path);
  require(version == kCheckpointVersion, ErrorKind::format,
          "unsupported checkpoint version " + std::to_string(version) +
              " (expected " + std::to_string(kCheckpointVersion) + ")");
  require(msize > 0 && msize < (1ULL << 26), ErrorKind::format,
          "checkpoint manifest size implausible: " + path);
  std::string mtext(msize, '\0');
  f.read(mtext.data(), static_cast<std::streamsize>(msize));
  require(f.gcount() == static_cast<std::streamsize>(msize), ErrorKind::format,
          "checkpoint truncated (manifest): " + path);

  // parse manifest
  std::vector<std::string> sections;
  std::map<std::string, size_t> floats_by_section;
  TrainedModel tm;
  tm.stage = static_cast<int>(stage);
  tm.seed = seed;
  {
    std::istringstream ss(mtext);
    std::string line;
    while (std::getline(ss, line)) {
      if (line.empty()) continue;
      const auto eq = line.find(" = ");
      require(eq != std::string::npos, ErrorKind::format,
              "checkpoint manifest line malformed: " + line);
      const std::string key = line.substr(0, eq);
      const std::string val = line.substr(eq + 3);
      if (key == "sections") {
        std::istringstream ls(val);
        std::string part;
        while (std::getline(ls, part, ',')) sections.push_back(part);
      } else if (key.rfind("section.", 0) == 0 && key.size() > 8 &&
                 key.find(".floats") != std::string::npos) {
        const std::string name = key.substr(8, key.size() - 8 - 7);
        floats_by_section[name] = std::stoull(val);
      } else if (key == "history.stage1") {
        tm.history_stage1 = parse_history(val);
      } else if (key == "history.stage2") {
        tm.history_stage2 = parse_history(val);
      } else if (key.rfind("config.", 0) == 0) {
        tm.config.set(key.substr(7), val);
      } else {
        fail(ErrorKind::format, "checkpoint manifest has unknown key: " + key);
      }
    }
  }
  require(!sections.empty() && sections[0] == "backbone", ErrorKind::format,
          "checkpoint manifest lacks a backbone section");
  const bool has_balanced =
      std::find(sections.begin(), sections.end(), "head.balanced") != sections.end();
  require(tm.stage == 2 ? has_balanced : true, ErrorKind::format,
          "stage-2 checkpoint without a balanced head");

  // rebuild the skeleton, then overwrite every parameter from the blobs
  tm.net.build(tm.config.model_config(), seed);
  if (has_balanced) tm.net.add_balanced_head(/*warm_start=*/true, seed);

  for_each_section(tm.net, sections, [&](const std::string& name, nn::ParamSet<float>& ps) {
    const auto it = floats_by_section.find(name);
    require(it != floats_by_section.end(), ErrorKind::format,
            "checkpoint manifest missing float count for section " + name);
    require(it->second == section_float_count(ps), ErrorKind::format,
            "checkpoint section " + name + " float count does not match config");
    for (auto& p : ps) {
      f.read(reinterpret_cast<char*>(p.value->data()),
             static_cast<std::streamsize>(p.value->size() * sizeof(float)));
      require(f.gcount() == static_cast<std::streamsize>(p.value->size() * sizeof(float)),
              ErrorKind::format, "checkpoint truncated (section " + name + ")");
    }
  });
  // must be at end of file now
  f.peek();
  require(f.eof(), ErrorKind::format, "checkpoint has trailing bytes: " + path);
  return tm;
}

}  // namespace glae::train
