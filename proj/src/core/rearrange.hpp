// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Channel-to-space feature rearrangement. Groups of r*r adjacent channels are
// folded into r x r spatial patches: source element (c, h, w) with group
// g = c / r^2 and in-group index q = c % r^2 lands at
// (g, h*r + q/r, w*r + q%r). In-group placement is 0-based row-major, fixed
// by kInGroupOrder below. The map is a bijection on elements, so the gradient
// of rearrange is inverse_rearrange of the upstream gradient.

#ifndef GLAE_CORE_REARRANGE_HPP
#define GLAE_CORE_REARRANGE_HPP

#include <string>

#include "core/tensor.hpp"

namespace glae::fr {

inline constexpr const char* kInGroupOrder = "row-major";

template <class T>
nn::Tensor<T> rearrange(const nn::Tensor<T>& x, int r) {
  require(r >= 1, ErrorKind::invalid_argument, "rearrange: r must be >= 1");
  const int r2 = r * r;
  require(x.c % r2 == 0, ErrorKind::invalid_argument,
          "rearrange: channel count " + std::to_string(x.c) +
              " not divisible by r^2 = " + std::to_string(r2));
  nn::Tensor<T> y = nn::Tensor<T>::uninitialized(x.n, x.c / r2, x.h * r, x.w * r);
#pragma omp parallel for schedule(static)
  for (int s = 0; s < x.n; ++s) {
    const T* xs = x.sample(s);
    T* ys = y.sample(s);
    for (int c = 0; c < x.c; ++c) {
      const int g = c / r2;
      const int q = c % r2;
      const int oy = q / r, ox = q % r;
      const T* src = xs + static_cast<size_t>(c) * x.h * x.w;
      T* dstc = ys + static_cast<size_t>(g) * y.h * y.w;
      for (int h = 0; h < x.h; ++h) {
        T* dst = dstc + static_cast<size_t>(h * r + oy) * y.w + ox;
        const T* row = src + static_cast<size_t>(h) * x.w;
        for (int w = 0; w < x.w; ++w) dst[static_cast<size_t>(w) * r] = row[w];
      }
    }
  }
  return y;
}

template <class T>
nn::Tensor<T> inverse_rearrange(const nn::Tensor<T>& y, int r) {
  require(r >= 1, ErrorKind::invalid_argument, "inverse_rearrange: r must be >= 1");
  require(y.h % r == 0 && y.w % r == 0, ErrorKind::invalid_argument,
          "inverse_rearrange: spatial dims not divisible by r");
  const int r2 = r * r;
  nn::Tensor<T> x = nn::Tensor<T>::uninitialized(y.n, y.c * r2, y.h / r, y.w / r);
#pragma omp parallel for schedule(static)
  for (int s = 0; s < y.n; ++s) {
    const T* ys = y.sample(s);
    T* xs = x.sample(s);
    for (int c = 0; c < x.c; ++c) {
      const int g = c / r2;
      const int q = c % r2;
      const int oy = q / r, ox = q % r;
      T* dst = xs + static_cast<size_t>(c) * x.h * x.w;
      const T* srcc = ys + static_cast<size_t>(g) * y.h * y.w;
      for (int h = 0; h < x.h; ++h) {
        const T* src = srcc + static_cast<size_t>(h * r + oy) * y.w + ox;
        T* row = dst + static_cast<size_t>(h) * x.w;
        for (int w = 0; w < x.w; ++w) row[w] = src[static_cast<size_t>(w) * r];
      }
    }
  }
  return x;
}

// The categorizing convolution admits kernel in {r, 2r} and stride in
// {r/2, r} (r/2 only for even r); kernel 0 / stride 0 select the (r, r)
// default, which keeps the output spatial dims equal to the pre-rearrangement
// feature map. No padding: the kernel must only ever read real pixels.
struct FrConvSpec {
  int kernel = 0;
  int stride = 0;

  void resolve(int r) {
    if (kernel == 0) kernel = r;
    if (stride == 0) stride = r;
    require(kernel == r || kernel == 2 * r, ErrorKind::config,
            "fr conv kernel must be r or 2r (got " + std::to_string(kernel) +
                " for r = " + std::to_string(r) + ")");
    const bool half_ok = (r % 2 == 0) && stride == r / 2;
    require(stride == r || half_ok, ErrorKind::config,
            "fr conv stride must be r or r/2 (got " + std::to_string(stride) +
                " for r = " + std::to_string(r) + ")");
  }
};

}  // namespace glae::fr

#endif
