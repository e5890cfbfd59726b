// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLAE_CORE_TENSOR_HPP
#define GLAE_CORE_TENSOR_HPP

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <vector>

#include "core/common.hpp"

namespace glae::nn {

// std::allocator that default-initializes on resize instead of zeroing, so
// buffers that are fully overwritten right away skip one memory pass.
template <class T, class A = std::allocator<T>>
struct default_init_allocator : A {
  template <class U>
  struct rebind {
    using other = default_init_allocator<U, typename std::allocator_traits<A>::template rebind_alloc<U>>;
  };
  using A::A;
  template <class U>
  void construct(U* ptr) noexcept(std::is_nothrow_default_constructible_v<U>) {
    ::new (static_cast<void*>(ptr)) U;
  }
  template <class U, class... Args>
  void construct(U* ptr, Args&&... args) {
    std::allocator_traits<A>::construct(static_cast<A&>(*this), ptr,
                                        std::forward<Args>(args)...);
  }
};

// Dense NCHW tensor. 2-D data (batches of vectors) uses h = w = 1.
template <class T>
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T, default_init_allocator<T>> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<size_t>(n_) * c_ * h_ * w_, T(0)) {}

  // every element is about to be overwritten; skip the zero fill
  static Tensor uninitialized(int n_, int c_, int h_, int w_) {
    Tensor t;
    t.n = n_; t.c = c_; t.h = h_; t.w = w_;
    t.v.resize(static_cast<size_t>(n_) * c_ * h_ * w_);
    return t;
  }

  size_t size() const { return v.size(); }
  size_t chw() const { return static_cast<size_t>(c) * h * w; }
  size_t plane() const { return static_cast<size_t>(h) * w; }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }
  T* sample(int i) { return v.data() + static_cast<size_t>(i) * chw(); }
  const T* sample(int i) const { return v.data() + static_cast<size_t>(i) * chw(); }

  T& at(int ni, int ci, int hi, int wi) {
    return v[((static_cast<size_t>(ni) * c + ci) * h + hi) * w + wi];
  }
  T at(int ni, int ci, int hi, int wi) const {
    return v[((static_cast<size_t>(ni) * c + ci) * h + hi) * w + wi];
  }

  void zero() { std::fill(v.begin(), v.end(), T(0)); }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
};

// Single-threaded blocked GEMM kernels. Row-major throughout. Every output
// element is a serial sum in ascending k, so results are bit-identical no
// matter how callers parallelize over samples or row blocks.

// C[M x N] = A[M x K] * B[K x N]   (+= when accumulate)
template <class T>
void gemm_nn(const T* A, const T* B, T* C, int M, int N, int K,
             bool accumulate = false) {
  constexpr int MB = 4;
  constexpr int NB = 64;
  T acc[MB][NB];
  for (int n0 = 0; n0 < N; n0 += NB) {
    const int nb = std::min(NB, N - n0);
    for (int m0 = 0; m0 < M; m0 += MB) {
      const int mb = std::min(MB, M - m0);
      for (int i = 0; i < mb; ++i) {
        if (accumulate)
          std::memcpy(acc[i], C + static_cast<size_t>(m0 + i) * N + n0,
                      sizeof(T) * nb);
        else
          std::memset(acc[i], 0, sizeof(T) * nb);
      }
      for (int k = 0; k < K; ++k) {
        const T* b = B + static_cast<size_t>(k) * N + n0;
        for (int i = 0; i < mb; ++i) {
          const T a = A[static_cast<size_t>(m0 + i) * K + k];
          for (int j = 0; j < nb; ++j) acc[i][j] += a * b[j];
        }
      }
      for (int i = 0; i < mb; ++i)
        std::memcpy(C + static_cast<size_t>(m0 + i) * N + n0, acc[i],
                    sizeof(T) * nb);
    }
  }
}

// C[M x N] = A^T * B with A stored [K x M]   (+= when accumulate)
template <class T>
void gemm_tn(const T* A, const T* B, T* C, int M, int N, int K,
             bool accumulate = false) {
  if (!accumulate) std::memset(C, 0, sizeof(T) * static_cast<size_t>(M) * N);
  for (int k = 0; k < K; ++k) {
    const T* a = A + static_cast<size_t>(k) * M;
    const T* b = B + static_cast<size_t>(k) * N;
    for (int m = 0; m < M; ++m) {
      const T av = a[m];
      T* crow = C + static_cast<size_t>(m) * N;
      for (int n = 0; n < N; ++n) crow[n] += av * b[n];
    }
  }
}

// C[M x N] = A[M x K] * B^T with B stored [N x K]   (+= when accumulate)
template <class T>
void gemm_nt(const T* A, const T* B, T* C, int M, int N, int K,
             bool accumulate = false) {
  for (int m = 0; m < M; ++m) {
    const T* a = A + static_cast<size_t>(m) * K;
    T* crow = C + static_cast<size_t>(m) * N;
    for (int n = 0; n < N; ++n) {
      const T* b = B + static_cast<size_t>(n) * K;
      T s0 = 0, s1 = 0, s2 = 0, s3 = 0;
      int k = 0;
      for (; k + 4 <= K; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
      }
      T s = ((s0 + s1) + (s2 + s3));
      for (; k < K; ++k) s += a[k] * b[k];
      crow[n] = accumulate ? crow[n] + s : s;
    }
  }
}

}  // namespace glae::nn

#endif
