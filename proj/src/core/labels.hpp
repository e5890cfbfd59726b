// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth label distributions over the age range [0, K] and the loss
// primitives shared by every classifier head. Pure functions, thread-safe.

#ifndef GLAE_CORE_LABELS_HPP
#define GLAE_CORE_LABELS_HPP

#include <span>
#include <vector>

namespace glae::labels {

// Softmax outputs are clamped to this floor before any log.
inline constexpr double kProbFloor = 1e-12;

// Gaussian density evaluated at age index k for target y, before
// renormalization over the truncated support.
double gaussian_label_density(int k, int y, double sigma);

// Discretized Gaussian centered at y, renormalized to sum exactly 1 over
// k = 0..K. Throws invalid_argument for y outside [0, K] or sigma <= 0.
std::vector<double> make_label_distribution(int y, double sigma, int K);

// KL(z || p) = sum_k z_k log(z_k / p_k), with 0 * log(0/.) = 0.
// Requires matching lengths and strictly positive p entries.
double kl_loss(std::span<const double> z, std::span<const double> p);

// Expectation refinement: y_hat = sum_k k * p_k.
double expected_age(std::span<const double> p);

// l1 regression gap |y - y_hat|.
double er_loss(int y, double y_hat);

// kl_loss + er_loss(expected_age), the unweighted training loss of a single
// prediction distribution.
double base_loss(std::span<const double> z, std::span<const double> p, int y);

}  // namespace glae::labels

#endif
