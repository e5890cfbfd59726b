// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Evaluation metrics: MAE over samples, class-wise MAE (CMAE) over non-empty
// classes, epsilon-error under per-sample annotation stds, and AAR with its
// per-decade group MAEs. Predicted ages enter every metric as real numbers;
// rounding is presentation only.

#ifndef GLAE_CORE_METRICS_HPP
#define GLAE_CORE_METRICS_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace glae::metrics {

struct PredictionRecord {
  std::string id;
  int true_age = 0;
  double pred_age = 0.0;
  std::optional<double> sigma;  // annotation std for epsilon-error
};

struct AgeRange {
  int lo = 0, hi = 0;  // inclusive
  std::string label() const;
  bool contains(int age) const { return age >= lo && age <= hi; }
};

struct ProtocolConfig {
  int K = 100;
  AgeRange head{18, 65};
  std::vector<AgeRange> tails{{0, 17}, {66, 100}};
  int aar_group_width = 10;

  std::vector<AgeRange> report_ranges() const;  // tail, head, tail order
  void validate() const;
};

double mae(std::span<const PredictionRecord> records);

double cmae(std::span<const PredictionRecord> records, int K);

// 1 - mean_i exp(-(pred - true)^2 / (2 sigma_i^2)); every record needs sigma
double epsilon_error(std::span<const PredictionRecord> records);

double aar_score(double mae_value, double sigma_spread);

struct AarResult {
  double aar = 0;
  double mae = 0;
  double sigma_spread = 0;
  std::map<int, double> group_mae;  // keyed by group start age, non-empty only
};
AarResult aar(std::span<const PredictionRecord> records, const ProtocolConfig& protocol);

// MAE restricted to each range; ranges with no samples are absent
std::map<std::string, double> group_mae(std::span<const PredictionRecord> records,
                                        std::span<const AgeRange> ranges);

// CMAE restricted to each range (mean of per-class MAE over the range's
// non-empty classes); absent when the range holds no samples
std::map<std::string, double> group_cmae(std::span<const PredictionRecord> records,
                                         std::span<const AgeRange> ranges);

struct MetricsReport {
  int n = 0;
  int m = 0;  // classes with at least one record
  double mae = 0;
  double cmae = 0;
  std::vector<std::optional<double>> per_class_mae;  // K+1 entries
  std::vector<int> per_class_count;                  // K+1 entries
  std::map<std::string, double> group_mae;
  std::map<std::string, double> group_cmae;
  std::optional<double> epsilon;
  double aar = 0;
  double sigma_spread = 0;
  std::map<int, double> aar_group_mae;
};

MetricsReport build_report(std::span<const PredictionRecord> records,
                           const ProtocolConfig& protocol);

// UTF-8 CSV with header id,true_age,pred_age[,sigma]
std::vector<PredictionRecord> read_predictions_csv(const std::string& path);
void write_predictions_csv(const std::string& path,
                           std::span<const PredictionRecord> records);

std::string report_to_json(const MetricsReport& r);
std::string report_to_text(const MetricsReport& r);
MetricsReport report_from_json_file(const std::string& path);

}  // namespace glae::metrics

#endif
