// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Pixel-level auxiliary learning: a local branch that supervises the category
// distribution of every score-map pixel, and a holistic branch fed by an MLP
// projection of the flattened score map. The local branch exists only at
// training time; inference reads the holistic output.

#ifndef GLAE_CORE_PIXEL_AUX_HPP
#define GLAE_CORE_PIXEL_AUX_HPP

#include <cmath>
#include <span>
#include <vector>

#include "core/labels.hpp"
#include "core/nn.hpp"

namespace glae::pa {

struct BranchLosses {
  double l_loc = 0;
  double l_hol = 0;
  double l_sum = 0;
};

// softmax over n entries with stride between them; output clamped to the
// probability floor so downstream logs are finite
template <class T>
void softmax_strided(const T* x, int n, size_t stride, T* out, size_t out_stride) {
  T mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[static_cast<size_t>(i) * stride]);
  T sum = 0;
  for (int i = 0; i < n; ++i) {
    const T e = std::exp(x[static_cast<size_t>(i) * stride] - mx);
    out[static_cast<size_t>(i) * out_stride] = e;
    sum += e;
  }
  const T floor = static_cast<T>(labels::kProbFloor);
  for (int i = 0; i < n; ++i) {
    T& o = out[static_cast<size_t>(i) * out_stride];
    o = std::max(o / sum, floor);
  }
}

// Per-sample loss + logit gradient of one category distribution:
//   L = KL(z || softmax(f)) [+ |y - E[softmax(f)]| when with_er]
//   dL/df_j = (p_j - z_j) [+ sign(yhat - y) * p_j * (j - yhat)]
// p must already be the softmax output; grad is accumulated with `scale`.
template <class T>
double dist_loss_grad(const T* p, size_t p_stride, const T* z, int n, int y,
                      bool with_er, T scale, T* grad, size_t g_stride) {
  double kl = 0, yhat = 0;
  for (int i = 0; i < n; ++i) {
    const double pi = p[static_cast<size_t>(i) * p_stride];
    const double zi = z[i];
    if (zi > 0) kl += zi * std::log(zi / pi);
    yhat += static_cast<double>(i) * pi;
  }
  double loss = kl;
  double er_sign = 0;
  if (with_er) {
    const double e = yhat - static_cast<double>(y);
    loss += std::abs(e);
    er_sign = (e > 0) - (e < 0);
  }
  for (int i = 0; i < n; ++i) {
    const double pi = p[static_cast<size_t>(i) * p_stride];
    double g = pi - static_cast<double>(z[i]);
    if (with_er) g += er_sign * pi * (static_cast<double>(i) - yhat);
    grad[static_cast<size_t>(i) * g_stride] += static_cast<T>(g) * scale;
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Single-sample reference operations (double precision), mirroring the batch
// path used in training. These are the library-facing contracts; the trainer
// uses the fused batch versions below.

// softmax over the category axis at every (h, w); returns [h*w][K+1]
inline std::vector<std::vector<double>> local_scores(const nn::Tensor<double>& S) {
  const size_t plane = S.plane();
  std::vector<std::vector<double>> out(plane, std::vector<double>(S.c));
  for (size_t px = 0; px < plane; ++px)
    softmax_strided(S.data() + px, S.c, plane, out[px].data(), size_t{1});
  return out;
}

// mean over pixels of base_loss(z, p_pixel, y)
inline double local_loss(const nn::Tensor<double>& S, std::span<const double> z, int y) {
  require(static_cast<size_t>(S.c) == z.size(), ErrorKind::invalid_argument,
          "local_loss: score channels must equal K+1");
  const auto scores = local_scores(S);
  double acc = 0;
  for (const auto& p : scores) acc += labels::base_loss(z, p, y);
  return acc / static_cast<double>(scores.size());
}

// ---------------------------------------------------------------------------
// MLP projection (holistic branch). Depth 0 is a single linear map from the
// flattened score map to K+1 logits; depth d adds d hidden layers of
// linear -> batch norm -> relu at the configured width.

template <class T>
struct Projection {
  int in = 0, out = 0, depth = 0, width = 0;
  std::vector<nn::Linear<T>> fc;
  std::vector<nn::BatchNorm2d<T>> bn;
  std::vector<nn::ReLU<T>> act;

  void init(int in_, int out_, int depth_, int width_, Rng& rng) {
    in = in_; out = out_; depth = depth_; width = width_;
    fc.clear(); bn.clear(); act.clear();
    fc.resize(static_cast<size_t>(depth) + 1);
    bn.resize(depth);
    act.resize(depth);
    int cur = in;
    for (int d = 0; d < depth; ++d) {
      fc[d].init(cur, width, rng);
      bn[d].init(width);
      cur = width;
    }
    fc[depth].init(cur, out, rng);
  }

  nn::Tensor<T> forward(const nn::Tensor<T>& x, bool train) {
    nn::Tensor<T> h = fc[0].forward(x, train);
    for (int d = 0; d < depth; ++d) {
      h = bn[d].forward(h, train);
      h = act[d].forward(h, train);
      h = fc[d + 1].forward(h, train);
    }
    return h;
  }

  nn::Tensor<T> backward(const nn::Tensor<T>& dy) {
    nn::Tensor<T> g = dy;
    for (int d = depth - 1; d >= 0; --d) {
      g = fc[d + 1].backward(g);
      g = act[d].backward(g);
      g = bn[d].backward(g);
    }
    return fc[0].backward(g);
  }

  void collect_params(nn::ParamSet<T>& out_set, const std::string& prefix) {
    for (int d = 0; d <= depth; ++d) {
      fc[d].collect_params(out_set, prefix + ".fc" + std::to_string(d));
      if (d < depth) bn[d].collect_params(out_set, prefix + ".bn" + std::to_string(d));
    }
  }

  size_t num_params() const {
    size_t total = 0;
    for (const auto& l : fc) total += l.num_params();
    for (const auto& n : bn) total += n.gamma.size() + n.beta.size();
    return total;
  }
};

// flatten -> projection -> softmax; the projection output doubles as logits
// because the categorizing convolution already set channels to K+1
template <class T>
std::vector<double> holistic_scores(const nn::Tensor<T>& S, Projection<T>& proj) {
  require(static_cast<int>(S.chw()) == proj.in, ErrorKind::invalid_argument,
          "holistic_scores: flattened score map does not match projection input");
  nn::Tensor<T> flat(1, static_cast<int>(S.chw()), 1, 1);
  std::copy(S.v.begin(), S.v.end(), flat.v.begin());
  nn::Tensor<T> logits = proj.forward(flat, false);
  std::vector<double> p(logits.c);
  std::vector<T> tmp(logits.c);
  softmax_strided(logits.data(), logits.c, size_t{1}, tmp.data(), size_t{1});
  for (int i = 0; i < logits.c; ++i) p[i] = static_cast<double>(tmp[i]);
  return p;
}

// Both branch losses of one sample (reference path).
inline BranchLosses total_loss(const nn::Tensor<double>& S, Projection<double>& proj,
                               std::span<const double> z, int y) {
  BranchLosses out;
  out.l_loc = local_loss(S, z, y);
  const auto p_hol = holistic_scores(S, proj);
  out.l_hol = labels::base_loss(z, p_hol, y);
  out.l_sum = out.l_loc + out.l_hol;
  return out;
}

}  // namespace glae::pa

#endif
