// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/common.hpp"

namespace glae::metrics {

using nlohmann::json;

std::string AgeRange::label() const {
  return std::to_string(lo) + "-" + std::to_string(hi);
}

std::vector<AgeRange> ProtocolConfig::report_ranges() const {
  std::vector<AgeRange> out;
  if (!tails.empty()) out.push_back(tails.front());
  out.push_back(head);
  for (size_t i = 1; i < tails.size(); ++i) out.push_back(tails[i]);
  return out;
}

void ProtocolConfig::validate() const {
  require(K >= 1, ErrorKind::config, "protocol: K must be >= 1");
  require(aar_group_width >= 1, ErrorKind::config, "protocol: group width must be >= 1");
  // the head range plus tail ranges must partition [0, K]
  std::vector<char> covered(static_cast<size_t>(K) + 1, 0);
  auto mark = [&](const AgeRange& r) {
    require(r.lo <= r.hi && r.lo >= 0 && r.hi <= K, ErrorKind::config,
            "protocol: range " + r.label() + " outside [0, K]");
    for (int a = r.lo; a <= r.hi; ++a) {
      require(!covered[a], ErrorKind::config,
              "protocol: overlapping ranges at age " + std::to_string(a));
      covered[a] = 1;
    }
  };
  mark(head);
  for (const auto& t : tails) mark(t);
  for (int a = 0; a <= K; ++a)
    require(covered[a], ErrorKind::config,
            "protocol: ranges do not cover age " + std::to_string(a));
}

namespace {

void require_nonempty(std::span<const PredictionRecord> records, const char* what) {
  require(!records.empty(), ErrorKind::invalid_argument,
          std::string(what) + ": no records");
}

void validate_record(const PredictionRecord& r, int K) {
  require(r.true_age >= 0 && r.true_age <= K, ErrorKind::invalid_argument,
          "record " + r.id + ": true age out of range");
  require(std::isfinite(r.pred_age), ErrorKind::invalid_argument,
          "record " + r.id + ": predicted age not finite");
}

// per-class absolute-error sums and counts
struct ClassAccum {
  std::vector<double> err;
  std::vector<int> cnt;
  explicit ClassAccum(int K) : err(static_cast<size_t>(K) + 1, 0.0),
                               cnt(static_cast<size_t>(K) + 1, 0) {}
  void add(const PredictionRecord& r) {
    err[r.true_age] += std::abs(r.true_age - r.pred_age);
    ++cnt[r.true_age];
  }
};

}  // namespace

double mae(std::span<const PredictionRecord> records) {
  require_nonempty(records, "mae");
  double acc = 0;
  for (const auto& r : records) acc += std::abs(r.true_age - r.pred_age);
  return acc / static_cast<double>(records.size());
}

double cmae(std::span<const PredictionRecord> records, int K) {
  require_nonempty(records, "cmae");
  ClassAccum a(K);
  for (const auto& r : records) {
    validate_record(r, K);
    a.add(r);
  }
  double acc = 0;
  int m = 0;
  for (int k = 0; k <= K; ++k) {
    if (a.cnt[k] == 0) continue;
    acc += a.err[k] / a.cnt[k];
    ++m;
  }
  return acc / static_cast<double>(m);
}

double epsilon_error(std::span<const PredictionRecord> records) {
  require_nonempty(records, "epsilon_error");
  double acc = 0;
  for (const auto& r : records) {
    require(r.sigma.has_value() && *r.sigma > 0, ErrorKind::invalid_argument,
            "epsilon_error: record " + r.id + " lacks a positive sigma");
    const double d = r.pred_age - r.true_age;
    acc += std::exp(-d * d / (2.0 * (*r.sigma) * (*r.sigma)));
  }
  return 1.0 - acc / static_cast<double>(records.size());
}

double aar_score(double mae_value, double sigma_spread) {
  return std::max(0.0, 7.0 - mae_value) + std::max(0.0, 3.0 - sigma_spread);
}

AarResult aar(std::span<const PredictionRecord> records, const ProtocolConfig& protocol) {
  require_nonempty(records, "aar");
  AarResult out;
  out.mae = mae(records);
  std::map<int, std::pair<double, int>> groups;  // start age -> (err sum, count)
  for (const auto& r : records) {
    const int g = (r.true_age / protocol.aar_group_width) * protocol.aar_group_width;
    auto& slot = groups[g];
    slot.first += std::abs(r.true_age - r.pred_age);
    slot.second += 1;
  }
  double var = 0;
  for (const auto& [g, slot] : groups) {
    const double gm = slot.first / slot.second;
    out.group_mae[g] = gm;
    var += (gm - out.mae) * (gm - out.mae);
  }
  out.sigma_spread = std::sqrt(var / static_cast<double>(groups.size()));
  out.aar = aar_score(out.mae, out.sigma_spread);
  return out;
}

std::map<std::string, double> group_mae(std::span<const PredictionRecord> records,
                                        std::span<const AgeRange> ranges) {
  std::map<std::string, double> out;
  for (const auto& range : ranges) {
    double acc = 0;
    int n = 0;
    for (const auto& r : records) {
      if (!range.contains(r.true_age)) continue;
      acc += std::abs(r.true_age - r.pred_age);
      ++n;
    }
    if (n > 0) out[range.label()] = acc / n;
  }
  return out;
}

std::map<std::string, double> group_cmae(std::span<const PredictionRecord> records,
                                         std::span<const AgeRange> ranges) {
  std::map<std::string, double> out;
  for (const auto& range : ranges) {
    std::map<int, std::pair<double, int>> per_class;
    for (const auto& r : records) {
      if (!range.contains(r.true_age)) continue;
      auto& slot = per_class[r.true_age];
      slot.first += std::abs(r.true_age - r.pred_age);
      slot.second += 1;
    }
    if (per_class.empty()) continue;
    double acc = 0;
    for (const auto& [age, slot] : per_class) acc += slot.first / slot.second;
    out[range.label()] = acc / static_cast<double>(per_class.size());
  }
  return out;
}

MetricsReport build_report(std::span<const PredictionRecord> records,
                           const ProtocolConfig& protocol) {
  protocol.validate();
  require_nonempty(records, "build_report");
  MetricsReport rep;
  rep.n = static_cast<int>(records.size());
  ClassAccum a(protocol.K);
  bool all_sigma = true;
  for (const auto& r : records) {
    validate_record(r, protocol.K);
    a.add(r);
    all_sigma = all_sigma && r.sigma.has_value();
  }
  rep.per_class_mae.assign(static_cast<size_t>(protocol.K) + 1, std::nullopt);
  rep.per_class_count.assign(static_cast<size_t>(protocol.K) + 1, 0);
  for (int k = 0; k <= protocol.K; ++k) {
    rep.per_class_count[k] = a.cnt[k];
    if (a.cnt[k] > 0) rep.per_class_mae[k] = a.err[k] / a.cnt[k];
  }
  rep.mae = mae(records);
  rep.cmae = cmae(records, protocol.K);
  for (const auto& v : rep.per_class_mae) rep.m += v.has_value();
  const auto ranges = protocol.report_ranges();
  rep.group_mae = group_mae(records, ranges);
  rep.group_cmae = group_cmae(records, ranges);
  if (all_sigma) rep.epsilon = epsilon_error(records);
  const AarResult ar = aar(records, protocol);
  rep.aar = ar.aar;
  rep.sigma_spread = ar.sigma_spread;
  rep.aar_group_mae = ar.group_mae;
  return rep;
}

std::vector<PredictionRecord> read_predictions_csv(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), ErrorKind::io, "cannot open predictions file " + path);
  std::string line;
  require(static_cast<bool>(std::getline(f, line)), ErrorKind::format,
          "empty predictions file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_sigma = false;
  if (line == "id,true_age,pred_age,sigma") with_sigma = true;
  else
    require(line == "id,true_age,pred_age", ErrorKind::format,
            "unexpected predictions header: " + line);
  std::vector<PredictionRecord> out;
  int row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, ',')) parts.push_back(part);
    require(parts.size() == (with_sigma ? 4u : 3u), ErrorKind::format,
            "malformed predictions row " + std::to_string(row) + " in " + path);
    PredictionRecord r;
    r.id = parts[0];
    try {
      r.true_age = std::stoi(parts[1]);
      r.pred_age = std::stod(parts[2]);
      if (with_sigma) r.sigma = std::stod(parts[3]);
    } catch (const std::exception&) {
      fail(ErrorKind::format, "bad number in predictions row " + std::to_string(row));
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_predictions_csv(const std::string& path,
                           std::span<const PredictionRecord> records) {
  const bool with_sigma = !records.empty() && records.front().sigma.has_value();
  std::ofstream f(path);
  require(f.good(), ErrorKind::io, "cannot write predictions file " + path);
  f << (with_sigma ? "id,true_age,pred_age,sigma" : "id,true_age,pred_age") << "\n";
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.9f", r.pred_age);
    f << r.id << "," << r.true_age << "," << buf;
    if (with_sigma) {
      require(r.sigma.has_value(), ErrorKind::invalid_argument,
              "write_predictions_csv: mixed sigma presence");
      std::snprintf(buf, sizeof(buf), "%.9f", *r.sigma);
      f << "," << buf;
    }
    f << "\n";
  }
  require(f.good(), ErrorKind::io, "write failed for " + path);
}

std::string report_to_json(const MetricsReport& r) {
  json j;
  j["n"] = r.n;
  j["m"] = r.m;
  j["mae"] = r.mae;
  j["cmae"] = r.cmae;
  json pcm = json::array();
  for (const auto& v : r.per_class_mae) {
    if (v.has_value()) pcm.push_back(*v);
    else pcm.push_back(nullptr);
  }
  j["per_class_mae"] = std::move(pcm);
  j["per_class_count"] = r.per_class_count;
  j["group_mae"] = r.group_mae;
  j["group_cmae"] = r.group_cmae;
  if (r.epsilon.has_value()) j["epsilon"] = *r.epsilon;
  j["aar"] = r.aar;
  j["sigma_spread"] = r.sigma_spread;
  json agm = json::object();
  for (const auto& [g, v] : r.aar_group_mae) agm[std::to_string(g)] = v;
  j["aar_group_mae"] = std::move(agm);
  return j.dump(2) + "\n";
}

MetricsReport report_from_json_file(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), ErrorKind::io, "cannot open report " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::format, "bad report json in " + path + ": " + e.what());
  }
  MetricsReport r;
  try {
    r.n = j.at("n").get<int>();
    r.m = j.at("m").get<int>();
    r.mae = j.at("mae").get<double>();
    r.cmae = j.at("cmae").get<double>();
    for (const auto& v : j.at("per_class_mae")) {
      if (v.is_null()) r.per_class_mae.push_back(std::nullopt);
      else r.per_class_mae.push_back(v.get<double>());
    }
    r.per_class_count = j.at("per_class_count").get<std::vector<int>>();
    r.group_mae = j.at("group_mae").get<std::map<std::string, double>>();
    r.group_cmae = j.at("group_cmae").get<std::map<std::string, double>>();
    if (j.contains("epsilon")) r.epsilon = j.at("epsilon").get<double>();
    r.aar = j.at("aar").get<double>();
    r.sigma_spread = j.at("sigma_spread").get<double>();
    for (const auto& [k, v] : j.at("aar_group_mae").items())
      r.aar_group_mae[std::stoi(k)] = v.get<double>();
  } catch (const json::exception& e) {
    fail(ErrorKind::format, "report json missing fields in " + path + ": " + e.what());
  }
  return r;
}

std::string report_to_text(const MetricsReport& r) {
  std::ostringstream os;
  char buf[128];
  os << "samples            " << r.n << "\n";
  os << "classes (non-empty) " << r.m << "\n";
  std::snprintf(buf, sizeof(buf), "MAE                %.4f\n", r.mae);
  os << buf;
  std::snprintf(buf, sizeof(buf), "CMAE               %.4f\n", r.cmae);
  os << buf;
  if (r.epsilon.has_value()) {
    std::snprintf(buf, sizeof(buf), "epsilon-error      %.4f\n", *r.epsilon);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "AAR                %.4f (sigma %.4f)\n", r.aar,
                r.sigma_spread);
  os << buf;
  os << "group MAE / CMAE\n";
  for (const auto& [label, v] : r.group_mae) {
    const auto it = r.group_cmae.find(label);
    if (it != r.group_cmae.end())
      std::snprintf(buf, sizeof(buf), "  %-9s %.4f / %.4f\n", label.c_str(), v,
                    it->second);
    else
      std::snprintf(buf, sizeof(buf), "  %-9s %.4f / --\n", label.c_str(), v);
    os << buf;
  }
  return os.str();
}

}  // namespace glae::metrics
