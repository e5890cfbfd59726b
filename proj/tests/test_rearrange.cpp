// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "core/nn.hpp"
#include "core/rearrange.hpp"

using namespace glae;
using nn::Tensor;

namespace {

Tensor<float> random_tensor(int n, int c, int h, int w, uint64_t seed) {
  Tensor<float> t(n, c, h, w);
  Rng rng(seed);
  for (auto& v : t.v) v = static_cast<float>(rng.uniform(-2.0, 2.0));
  return t;
}

}  // namespace

TEST_CASE("r=2 enumeration: channel quadruple becomes a 2x2 patch") {
  Tensor<float> x(1, 4, 1, 1);
  x.v = {1.f, 2.f, 3.f, 4.f};  // a, b, c, d
  const auto y = fr::rearrange(x, 2);
  CHECK(y.c == 1);
  CHECK(y.h == 2);
  CHECK(y.w == 2);
  CHECK(y.at(0, 0, 0, 0) == 1.f);
  CHECK(y.at(0, 0, 0, 1) == 2.f);
  CHECK(y.at(0, 0, 1, 0) == 3.f);
  CHECK(y.at(0, 0, 1, 1) == 4.f);
}

TEST_CASE("full index map for r=2 on a 8x3x3 tensor") {
  const auto x = random_tensor(1, 8, 3, 3, 5);
  const auto y = fr::rearrange(x, 2);
  CHECK(y.c == 2);
  CHECK(y.h == 6);
  CHECK(y.w == 6);
  for (int c = 0; c < 8; ++c)
    for (int h = 0; h < 3; ++h)
      for (int w = 0; w < 3; ++w) {
        const int g = c / 4, q = c % 4;
        CHECK(y.at(0, g, h * 2 + q / 2, w * 2 + q % 2) == x.at(0, c, h, w));
      }
}

TEST_CASE("r=1 is the identity") {
  const auto x = random_tensor(2, 6, 4, 4, 9);
  const auto y = fr::rearrange(x, 1);
  CHECK(y.v == x.v);
  CHECK(y.c == x.c);
}

TEST_CASE("resnet-scale shape: 512x7x7 with r=16 gives 2x112x112") {
  const auto x = random_tensor(1, 512, 7, 7, 13);
  const auto y = fr::rearrange(x, 16);
  CHECK(y.c == 2);
  CHECK(y.h == 112);
  CHECK(y.w == 112);
  const auto back = fr::inverse_rearrange(y, 16);
  CHECK(back.v == x.v);
}

TEST_CASE("round trips are bitwise and values form the same multiset") {
  Rng seeds(21);
  for (int rep = 0; rep < 12; ++rep) {
    const int r = 1 + static_cast<int>(seeds.below(4));
    const int c = r * r * (1 + static_cast<int>(seeds.below(4)));
    const int h = 1 + static_cast<int>(seeds.below(6));
    const int w = 1 + static_cast<int>(seeds.below(6));
    const auto x = random_tensor(2, c, h, w, seeds.next_u64());
    const auto y = fr::rearrange(x, r);
    CHECK(fr::inverse_rearrange(y, r).v == x.v);

    auto xs = std::vector<float>(x.v.begin(), x.v.end());
    auto ys = std::vector<float>(y.v.begin(), y.v.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    CHECK(xs == ys);
  }
}

TEST_CASE("inverse applied first then rearranged returns the original") {
  const auto t = random_tensor(1, 2, 8, 8, 33);
  const auto widened = fr::inverse_rearrange(t, 2);  // 8 x 4 x 4
  CHECK(widened.c == 8);
  CHECK(fr::rearrange(widened, 2).v == t.v);
}

TEST_CASE("per-group channel sums match the corresponding output patch") {
  const auto x = random_tensor(1, 18, 3, 5, 77);
  const int r = 3;
  const auto y = fr::rearrange(x, r);
  for (int g = 0; g < 2; ++g)
    for (int h = 0; h < 3; ++h)
      for (int w = 0; w < 5; ++w) {
        double in_sum = 0, out_sum = 0;
        for (int q = 0; q < r * r; ++q) in_sum += x.at(0, g * r * r + q, h, w);
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx) out_sum += y.at(0, g, h * r + dy, w * r + dx);
        CHECK(in_sum == doctest::Approx(out_sum).epsilon(1e-6));
      }
}

TEST_CASE("divisibility violations are rejected") {
  const auto x = random_tensor(1, 6, 2, 2, 3);
  CHECK_THROWS_AS(fr::rearrange(x, 2), Error);  // 6 % 4 != 0
  const auto y = random_tensor(1, 1, 3, 3, 3);
  CHECK_THROWS_AS(fr::inverse_rearrange(y, 2), Error);  // 3 % 2 != 0
}

TEST_CASE("categorizing conv shape arithmetic") {
  Rng rng(3);
  nn::Conv2d<float> conv;
  conv.init(2, 101, 8, 8, 0, rng);
  const auto y = conv.forward(random_tensor(1, 2, 64, 64, 8), false);
  CHECK(y.c == 101);
  CHECK(y.h == 8);
  CHECK(y.w == 8);

  nn::Conv2d<float> conv2;  // the (2r, r) variant at r = 16
  conv2.init(2, 101, 32, 16, 0, rng);
  const auto y2 = conv2.forward(random_tensor(1, 2, 112, 112, 9), false);
  CHECK(y2.h == 6);
  CHECK(y2.w == 6);
}

TEST_CASE("kernel exceeding the input extent is an error") {
  Rng rng(4);
  nn::Conv2d<float> conv;
  conv.init(1, 3, 8, 8, 0, rng);
  CHECK_THROWS_AS(conv.forward(random_tensor(1, 1, 4, 4, 2), false), Error);
}

TEST_CASE("1x1 convolution with identity weights reproduces the input") {
  Rng rng(5);
  nn::Conv2d<float> conv;
  conv.init(1, 2, 1, 1, 0, rng);
  std::fill(conv.W.begin(), conv.W.end(), 0.f);
  std::fill(conv.b.begin(), conv.b.end(), 0.f);
  conv.W[0] = 1.f;  // channel 0 passes through
  const auto x = random_tensor(1, 1, 5, 5, 6);
  const auto y = conv.forward(x, false);
  for (int h = 0; h < 5; ++h)
    for (int w = 0; w < 5; ++w) CHECK(y.at(0, 0, h, w) == x.at(0, 0, h, w));
}

TEST_CASE("admissible kernel/stride pairs resolve, others are rejected") {
  for (int r : {2, 4, 8, 16}) {
    for (int kernel : {r, 2 * r}) {
      for (int stride : {r / 2, r}) {
        fr::FrConvSpec spec{kernel, stride};
        CHECK_NOTHROW(spec.resolve(r));
      }
    }
  }
  fr::FrConvSpec def{};  // 0/0 resolves to (r, r)
  def.resolve(8);
  CHECK(def.kernel == 8);
  CHECK(def.stride == 8);

  fr::FrConvSpec bad_kernel{3 * 8, 8};
  CHECK_THROWS_AS(bad_kernel.resolve(8), Error);
  fr::FrConvSpec bad_stride{8, 3};
  CHECK_THROWS_AS(bad_stride.resolve(8), Error);
  fr::FrConvSpec odd_half{5, 2};  // r/2 undefined for odd r
  CHECK_THROWS_AS(odd_half.resolve(5), Error);
}

TEST_CASE("gradient through rearrange is the inverse permutation") {
  const auto upstream = random_tensor(1, 2, 6, 6, 55);
  const auto g = fr::inverse_rearrange(upstream, 3);
  // moving one output element moves exactly one input element
  for (int c = 0; c < 18; ++c)
    for (int h = 0; h < 2; ++h)
      for (int w = 0; w < 2; ++w) {
        const int gidx = c / 9, q = c % 9;
        CHECK(g.at(0, c, h, w) == upstream.at(0, gidx, h * 3 + q / 3, w * 3 + q % 3));
      }
}
