// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "core/common.hpp"
#include "core/labels.hpp"

using namespace glae;

namespace {

// independent evaluation of the discretized-Gaussian target: own loop, own
// exp, own normalization
std::vector<double> oracle_distribution(int y, double sigma, int K) {
  std::vector<double> z(K + 1);
  double sum = 0;
  for (int k = 0; k <= K; ++k) {
    z[k] = std::exp(-(k - y) * (k - y) / (2.0 * sigma * sigma)) /
           (sigma * std::sqrt(2.0 * M_PI));
    sum += z[k];
  }
  for (auto& v : z) v /= sum;
  return z;
}

}  // namespace

TEST_CASE("gaussian peak before normalization is 1/sqrt(2*pi) at sigma 1") {
  const double peak = labels::gaussian_label_density(50, 50, 1.0);
  CHECK(std::abs(peak - 1.0 / std::sqrt(2.0 * M_PI)) < 1e-12);
  CHECK(std::abs(peak - 0.398942) < 1e-6);
}

TEST_CASE("label distribution is symmetric around y") {
  const auto z = labels::make_label_distribution(50, 1.0, 100);
  for (int d = 1; d <= 3; ++d)
    CHECK(z[50 - d] == doctest::Approx(z[50 + d]).epsilon(1e-14));
}

TEST_CASE("label distribution at the boundary matches the summation oracle") {
  const auto z = labels::make_label_distribution(0, 1.0, 100);
  const auto want = oracle_distribution(0, 1.0, 100);
  double sum = std::accumulate(z.begin(), z.end(), 0.0);
  CHECK(std::abs(sum - 1.0) < 1e-12);
  CHECK(z[0] > z[1]);
  CHECK(z[1] > z[2]);
  for (int k = 0; k <= 100; ++k) CHECK(std::abs(z[k] - want[k]) < 1e-12);
}

TEST_CASE("label distribution sums to one with argmax y for every age") {
  for (int y = 0; y <= 100; ++y) {
    const auto z = labels::make_label_distribution(y, 1.0, 100);
    const double sum = std::accumulate(z.begin(), z.end(), 0.0);
    CHECK(std::abs(sum - 1.0) < 1e-12);
    const auto argmax = std::max_element(z.begin(), z.end()) - z.begin();
    CHECK(argmax == y);
  }
}

TEST_CASE("label distribution rejects bad inputs") {
  CHECK_THROWS_AS(labels::make_label_distribution(-1, 1.0, 100), Error);
  CHECK_THROWS_AS(labels::make_label_distribution(101, 1.0, 100), Error);
  CHECK_THROWS_AS(labels::make_label_distribution(5, 0.0, 100), Error);
  CHECK_THROWS_AS(labels::make_label_distribution(5, -1.0, 100), Error);
}

TEST_CASE("kl loss of identical distributions is zero") {
  const auto z = labels::make_label_distribution(30, 2.0, 100);
  CHECK(labels::kl_loss(z, z) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("kl loss on a two-point toy equals log 2") {
  const std::vector<double> z = {1.0, 0.0};
  const std::vector<double> p = {0.5, 0.5};
  CHECK(std::abs(labels::kl_loss(z, p) - std::log(2.0)) < 1e-12);
  CHECK(labels::kl_loss(z, p) == doctest::Approx(0.693147).epsilon(1e-5));
}

TEST_CASE("kl loss matches a term-by-term oracle on random distributions") {
  Rng rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> z(5), p(5);
    double zs = 0, ps = 0;
    for (int i = 0; i < 5; ++i) {
      z[i] = rng.uniform(0.01, 1.0);
      p[i] = rng.uniform(0.01, 1.0);
      zs += z[i];
      ps += p[i];
    }
    for (int i = 0; i < 5; ++i) { z[i] /= zs; p[i] /= ps; }
    double want = 0;
    for (int i = 0; i < 5; ++i) want += z[i] * std::log(z[i] / p[i]);
    CHECK(std::abs(labels::kl_loss(z, p) - want) < 1e-12);
    CHECK(labels::kl_loss(z, p) >= 0.0);
  }
}

namespace {

// a label distribution turned into a valid prediction: floor-clamped, then
// renormalized so every entry is strictly positive
std::vector<double> as_prediction(std::vector<double> p) {
  double sum = 0;
  for (auto& v : p) { v = std::max(v, labels::kProbFloor); sum += v; }
  for (auto& v : p) v /= sum;
  return p;
}

}  // namespace

TEST_CASE("kl loss is strictly positive for perturbed inputs") {
  auto z = labels::make_label_distribution(40, 1.0, 100);
  auto p = as_prediction(labels::make_label_distribution(41, 1.0, 100));
  CHECK(labels::kl_loss(z, p) > 0.0);
}

TEST_CASE("kl loss rejects mismatched or non-positive inputs") {
  const std::vector<double> z = {0.5, 0.5};
  CHECK_THROWS_AS(labels::kl_loss(z, std::vector<double>{1.0}), Error);
  CHECK_THROWS_AS(labels::kl_loss(z, std::vector<double>{1.0, 0.0}), Error);
}

TEST_CASE("expected age of degenerate and uniform distributions") {
  std::vector<double> onehot(101, 0.0);
  onehot[30] = 1.0;
  CHECK(labels::expected_age(onehot) == doctest::Approx(30.0));
  std::vector<double> uniform(101, 1.0 / 101.0);
  CHECK(labels::expected_age(uniform) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(labels::expected_age(std::vector<double>{0.2, 0.8}) == doctest::Approx(0.8));
}

TEST_CASE("expected age is linear in the distribution") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> p(11), q(11);
    double psum = 0, qsum = 0;
    for (int i = 0; i < 11; ++i) {
      p[i] = rng.uniform(0.0, 1.0);
      q[i] = rng.uniform(0.0, 1.0);
      psum += p[i];
      qsum += q[i];
    }
    for (int i = 0; i < 11; ++i) { p[i] /= psum; q[i] /= qsum; }
    const double a = rng.uniform();
    std::vector<double> mix(11);
    for (int i = 0; i < 11; ++i) mix[i] = a * p[i] + (1 - a) * q[i];
    const double want = a * labels::expected_age(p) + (1 - a) * labels::expected_age(q);
    CHECK(std::abs(labels::expected_age(mix) - want) < 1e-12);
  }
}

TEST_CASE("er loss basics") {
  CHECK(labels::er_loss(30, 30.0) == 0.0);
  CHECK(labels::er_loss(30, 27.5) == doctest::Approx(2.5));
  CHECK(labels::er_loss(0, 100.0) == doctest::Approx(100.0));
  CHECK_THROWS_AS(labels::er_loss(0, std::nan("")), Error);
}

TEST_CASE("base loss composes kl and er exactly") {
  std::vector<double> onehot(101, 0.0);
  onehot[40] = 1.0;
  CHECK(labels::base_loss(onehot, onehot, 40) == 0.0);

  const std::vector<double> z = {1.0, 0.0};
  const std::vector<double> p = {0.5, 0.5};
  CHECK(std::abs(labels::base_loss(z, p, 0) - (std::log(2.0) + 0.5)) < 1e-12);
  CHECK(labels::base_loss(z, p, 0) == doctest::Approx(1.193147).epsilon(1e-5));

  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    auto zz = labels::make_label_distribution(static_cast<int>(rng.below(101)), 1.0, 100);
    auto pp = as_prediction(labels::make_label_distribution(static_cast<int>(rng.below(101)), 2.0, 100));
    const int y = static_cast<int>(rng.below(101));
    const double kl = labels::kl_loss(zz, pp);
    const double er = labels::er_loss(y, labels::expected_age(pp));
    CHECK(labels::base_loss(zz, pp, y) == kl + er);  // no hidden weights
    CHECK(labels::base_loss(zz, pp, y) >= std::max(kl, er));
  }
}
