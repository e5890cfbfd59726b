// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/labels.hpp"

#include <cmath>

#include "core/common.hpp"

namespace glae::labels {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double gaussian_label_density(int k, int y, double sigma) {
  const double d = static_cast<double>(k) - static_cast<double>(y);
  return std::exp(-d * d / (2.0 * sigma * sigma)) / (std::sqrt(kTwoPi) * sigma);
}

std::vector<double> make_label_distribution(int y, double sigma, int K) {
  require(K >= 0, ErrorKind::invalid_argument, "make_label_distribution: K must be >= 0");
  require(y >= 0 && y <= K, ErrorKind::invalid_argument,
          "make_label_distribution: age out of range [0, K]");
  require(sigma > 0.0, ErrorKind::invalid_argument,
          "make_label_distribution: sigma must be positive");
  std::vector<double> z(static_cast<size_t>(K) + 1);
  double sum = 0.0;
  for (int k = 0; k <= K; ++k) {
    z[k] = gaussian_label_density(k, y, sigma);
    sum += z[k];
  }
  // The truncated support leaks mass (especially near the range edges), so the
  // vector is renormalized into a proper distribution.
  for (auto& v : z) v /= sum;
  return z;
}

double kl_loss(std::span<const double> z, std::span<const double> p) {
  require(z.size() == p.size(), ErrorKind::invalid_argument,
          "kl_loss: distribution length mismatch");
  double acc = 0.0;
  for (size_t k = 0; k < z.size(); ++k) {
    if (z[k] == 0.0) continue;
    require(p[k] > 0.0, ErrorKind::invalid_argument,
            "kl_loss: prediction entry must be positive");
    acc += z[k] * std::log(z[k] / p[k]);
  }
  return acc;
}

double expected_age(std::span<const double> p) {
  double acc = 0.0;
  for (size_t k = 0; k < p.size(); ++k) acc += static_cast<double>(k) * p[k];
  return acc;
}

double er_loss(int y, double y_hat) {
  require(std::isfinite(y_hat), ErrorKind::invalid_argument,
          "er_loss: predicted age must be finite");
  return std::abs(static_cast<double>(y) - y_hat);
}

double base_loss(std::span<const double> z, std::span<const double> p, int y) {
  return kl_loss(z, p) + er_loss(y, expected_age(p));
}

}  // namespace glae::labels
