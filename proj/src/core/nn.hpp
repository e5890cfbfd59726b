// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal CNN building blocks with explicit forward/backward passes.
// Conventions:
//  - layers own their parameters, gradients and forward caches; one trainer
//    thread drives forward(train=true)/backward, inference on fixed params is
//    safe from multiple threads via forward(train=false)
//  - gradients accumulate across backward calls until sgd.step() clears them
//  - every parallel loop keeps per-element accumulation order fixed, so
//    results do not depend on the number of threads

#ifndef GLAE_CORE_NN_HPP
#define GLAE_CORE_NN_HPP

#include <cmath>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace glae::nn {

template <class T>
struct ParamRef {
  std::string name;
  std::vector<T>* value = nullptr;
  std::vector<T>* grad = nullptr;  // null for buffers (running stats)
  bool trainable = false;
};

template <class T>
using ParamSet = std::vector<ParamRef<T>>;

template <class T>
void fan_in_uniform_init(std::vector<T>& w, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& x : w) x = static_cast<T>(rng.uniform(-bound, bound));
}

// ---------------------------------------------------------------------------
// Conv2d: im2col + GEMM, parallel over samples (sample outputs are disjoint
// and each weight-gradient row is accumulated serially over samples).

template <class T>
struct Conv2d {
  int cin = 0, cout = 0, k = 1, stride = 1, pad = 0;
  std::vector<T> W, b, dW, db;

  // caches
  std::vector<T> cols_;   // [n][cin*k*k x ho*wo]
  std::vector<T> colsT_;  // per-sample transpose, rebuilt each backward
  std::vector<T> wt_;     // W transposed, rebuilt each backward
  int in_h = 0, in_w = 0, batch = 0;

  void init(int cin_, int cout_, int k_, int stride_, int pad_, Rng& rng) {
    cin = cin_; cout = cout_; k = k_; stride = stride_; pad = pad_;
    W.assign(static_cast<size_t>(cout) * cin * k * k, T(0));
    b.assign(cout, T(0));
    dW.assign(W.size(), T(0));
    db.assign(b.size(), T(0));
    fan_in_uniform_init(W, cin * k * k, rng);
    fan_in_uniform_init(b, cin * k * k, rng);
  }

  int out_dim(int in) const { return (in + 2 * pad - k) / stride + 1; }

  // first/last output index whose input coordinate o*stride + koff - pad is
  // inside [0, extent)
  int valid_lo(int koff) const {
    const int num = pad - koff;
    return num <= 0 ? 0 : (num + stride - 1) / stride;
  }
  int valid_hi(int koff, int extent, int out) const {
    return std::min(out - 1, (extent - 1 - koff + pad) / stride);
  }

  void im2col(const T* x, T* cols, int hi, int wi, int ho, int wo) const {
    const size_t ncols = static_cast<size_t>(ho) * wo;
    size_t row = 0;
    for (int ci = 0; ci < cin; ++ci) {
      const T* xc = x + static_cast<size_t>(ci) * hi * wi;
      for (int ky = 0; ky < k; ++ky) {
        const int y_lo = valid_lo(ky), y_hi = valid_hi(ky, hi, ho);
        for (int kx = 0; kx < k; ++kx, ++row) {
          const int x_lo = valid_lo(kx), x_hi = valid_hi(kx, wi, wo);
          T* dst = cols + row * ncols;
          if (y_lo > 0)
            std::memset(dst, 0, sizeof(T) * static_cast<size_t>(y_lo) * wo);
          if (y_hi < ho - 1)
            std::memset(dst + static_cast<size_t>(y_hi + 1) * wo, 0,
                        sizeof(T) * static_cast<size_t>(ho - 1 - y_hi) * wo);
          for (int y = y_lo; y <= y_hi; ++y) {
            const int iy = y * stride + ky - pad;
            const T* src = xc + static_cast<size_t>(iy) * wi + kx - pad;
            T* drow = dst + static_cast<size_t>(y) * wo;
            for (int xo = 0; xo < x_lo; ++xo) drow[xo] = T(0);
            if (stride == 1) {
              std::memcpy(drow + x_lo, src + x_lo,
                          sizeof(T) * static_cast<size_t>(x_hi - x_lo + 1));
            } else {
              for (int xo = x_lo; xo <= x_hi; ++xo)
                drow[xo] = src[static_cast<size_t>(xo) * stride];
            }
            for (int xo = x_hi + 1; xo < wo; ++xo) drow[xo] = T(0);
          }
        }
      }
    }
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    require(x.c == cin, ErrorKind::invalid_argument,
            "Conv2d: input channel mismatch");
    require(x.h + 2 * pad >= k && x.w + 2 * pad >= k,
            ErrorKind::invalid_argument,
            "Conv2d: kernel larger than padded input extent");
    const int ho = out_dim(x.h), wo = out_dim(x.w);
    const int k9 = cin * k * k;
    const size_t ncols = static_cast<size_t>(ho) * wo;
    Tensor<T> y = Tensor<T>::uninitialized(x.n, cout, ho, wo);
    std::vector<T>* colstore = nullptr;
    if (train) {
      cols_.resize(static_cast<size_t>(x.n) * k9 * ncols);
      in_h = x.h; in_w = x.w; batch = x.n;
      colstore = &cols_;
    }
#pragma omp parallel for schedule(static)
    for (int s = 0; s < x.n; ++s) {
      thread_local std::vector<T> scratch;
      T* cols;
      if (colstore) {
        cols = colstore->data() + static_cast<size_t>(s) * k9 * ncols;
      } else {
        scratch.resize(static_cast<size_t>(k9) * ncols);
        cols = scratch.data();
      }
      im2col(x.sample(s), cols, x.h, x.w, ho, wo);
      T* ys = y.sample(s);
      gemm_nn(W.data(), cols, ys, cout, static_cast<int>(ncols), k9);
      for (int m = 0; m < cout; ++m) {
        T* row = ys + m * ncols;
        const T bias = b[m];
        for (size_t j = 0; j < ncols; ++j) row[j] += bias;
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int ho = dy.h, wo = dy.w;
    const int k9 = cin * k * k;
    const size_t ncols = static_cast<size_t>(ho) * wo;
    Tensor<T> dx(batch, cin, in_h, in_w);

    // transpose W once so the per-sample input-gradient GEMM runs on
    // contiguous rows
    wt_.resize(W.size());
    for (int m = 0; m < cout; ++m)
      for (int j = 0; j < k9; ++j)
        wt_[static_cast<size_t>(j) * cout + m] = W[static_cast<size_t>(m) * k9 + j];

    // input gradient, parallel over samples
#pragma omp parallel for schedule(static)
    for (int s = 0; s < batch; ++s) {
      thread_local std::vector<T> dcols;
      dcols.resize(static_cast<size_t>(k9) * ncols);
      gemm_nn(wt_.data(), dy.sample(s), dcols.data(), k9,
              static_cast<int>(ncols), cout);
      // col2im scatter-add
      T* dxs = dx.sample(s);
      size_t row = 0;
      for (int ci = 0; ci < cin; ++ci) {
        T* dxc = dxs + static_cast<size_t>(ci) * in_h * in_w;
        for (int ky = 0; ky < k; ++ky) {
          const int y_lo = valid_lo(ky), y_hi = valid_hi(ky, in_h, ho);
          for (int kx = 0; kx < k; ++kx, ++row) {
            const int x_lo = valid_lo(kx), x_hi = valid_hi(kx, in_w, wo);
            const T* src = dcols.data() + row * ncols;
            for (int y = y_lo; y <= y_hi; ++y) {
              const int iy = y * stride + ky - pad;
              T* dst = dxc + static_cast<size_t>(iy) * in_w + kx - pad;
              const T* srow = src + static_cast<size_t>(y) * wo;
              for (int xo = x_lo; xo <= x_hi; ++xo)
                dst[static_cast<size_t>(xo) * stride] += srow[xo];
            }
          }
        }
      }
    }

    // weight/bias gradient: transpose each sample's column buffer once so the
    // accumulation runs on the fast row-major kernel; output-channel blocks
    // are parallel, samples accumulate in ascending order inside each block
    colsT_.resize(cols_.size());
#pragma omp parallel for schedule(static)
    for (int s = 0; s < batch; ++s) {
      const T* c = cols_.data() + static_cast<size_t>(s) * k9 * ncols;
      T* ct = colsT_.data() + static_cast<size_t>(s) * k9 * ncols;
      for (int j = 0; j < k9; ++j)
        for (size_t n = 0; n < ncols; ++n)
          ct[n * k9 + j] = c[static_cast<size_t>(j) * ncols + n];
    }
    constexpr int MBLK = 16;
    const int nblk = (cout + MBLK - 1) / MBLK;
#pragma omp parallel for schedule(static)
    for (int blk = 0; blk < nblk; ++blk) {
      const int m0 = blk * MBLK;
      const int mend = std::min(cout, m0 + MBLK);
      for (int s = 0; s < batch; ++s) {
        const T* colsT = colsT_.data() + static_cast<size_t>(s) * k9 * ncols;
        const T* dys = dy.sample(s);
        gemm_nn(dys + static_cast<size_t>(m0) * ncols, colsT,
                dW.data() + static_cast<size_t>(m0) * k9, mend - m0, k9,
                static_cast<int>(ncols), /*accumulate=*/true);
        for (int m = m0; m < mend; ++m) {
          const T* row = dys + static_cast<size_t>(m) * ncols;
          T sum = 0;
          for (size_t j = 0; j < ncols; ++j) sum += row[j];
          db[m] += sum;
        }
      }
    }
    return dx;
  }

  void collect_params(ParamSet<T>& out, const std::string& prefix) {
    out.push_back({prefix + ".weight", &W, &dW, true});
    out.push_back({prefix + ".bias", &b, &db, true});
  }
};

// ---------------------------------------------------------------------------
// BatchNorm2d (also used for 1-D features as [n, c, 1, 1])

template <class T>
struct BatchNorm2d {
  int c = 0;
  T eps = static_cast<T>(1e-5);
  T momentum = static_cast<T>(0.1);
  std::vector<T> gamma, beta, running_mean, running_var;
  std::vector<T> dgamma, dbeta;

  // caches
  Tensor<T> xhat_;
  std::vector<T> inv_std_;

  void init(int c_) {
    c = c_;
    gamma.assign(c, T(1));
    beta.assign(c, T(0));
    running_mean.assign(c, T(0));
    running_var.assign(c, T(1));
    dgamma.assign(c, T(0));
    dbeta.assign(c, T(0));
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    require(x.c == c, ErrorKind::invalid_argument, "BatchNorm2d: channel mismatch");
    Tensor<T> y = Tensor<T>::uninitialized(x.n, x.c, x.h, x.w);
    const size_t plane = x.plane();
    const size_t count = static_cast<size_t>(x.n) * plane;
    if (train) {
      xhat_ = Tensor<T>::uninitialized(x.n, x.c, x.h, x.w);
      inv_std_.assign(c, T(0));
#pragma omp parallel for schedule(static)
      for (int ci = 0; ci < c; ++ci) {
        double mean = 0, var = 0;
        for (int s = 0; s < x.n; ++s) {
          const T* p = x.sample(s) + ci * plane;
          for (size_t j = 0; j < plane; ++j) mean += p[j];
        }
        mean /= static_cast<double>(count);
        for (int s = 0; s < x.n; ++s) {
          const T* p = x.sample(s) + ci * plane;
          for (size_t j = 0; j < plane; ++j) {
            const double d = p[j] - mean;
            var += d * d;
          }
        }
        var /= static_cast<double>(count);
        const T istd = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
        inv_std_[ci] = istd;
        const T g = gamma[ci], bb = beta[ci], mu = static_cast<T>(mean);
        for (int s = 0; s < x.n; ++s) {
          const T* p = x.sample(s) + ci * plane;
          T* xh = xhat_.sample(s) + ci * plane;
          T* yp = y.sample(s) + ci * plane;
          for (size_t j = 0; j < plane; ++j) {
            xh[j] = (p[j] - mu) * istd;
            yp[j] = g * xh[j] + bb;
          }
        }
        const double unbias = count > 1 ? static_cast<double>(count) / (count - 1) : 1.0;
        running_mean[ci] = (T(1) - momentum) * running_mean[ci] + momentum * static_cast<T>(mean);
        running_var[ci] = (T(1) - momentum) * running_var[ci] + momentum * static_cast<T>(var * unbias);
      }
    } else {
#pragma omp parallel for schedule(static)
      for (int ci = 0; ci < c; ++ci) {
        const T istd = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var[ci]) + static_cast<double>(eps)));
        const T g = gamma[ci], bb = beta[ci], mu = running_mean[ci];
        for (int s = 0; s < x.n; ++s) {
          const T* p = x.sample(s) + ci * plane;
          T* yp = y.sample(s) + ci * plane;
          for (size_t j = 0; j < plane; ++j) yp[j] = g * (p[j] - mu) * istd + bb;
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx = Tensor<T>::uninitialized(dy.n, dy.c, dy.h, dy.w);
    const size_t plane = dy.plane();
    const size_t count = static_cast<size_t>(dy.n) * plane;
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < c; ++ci) {
      double s1 = 0, s2 = 0;
      for (int s = 0; s < dy.n; ++s) {
        const T* d = dy.sample(s) + ci * plane;
        const T* xh = xhat_.sample(s) + ci * plane;
        for (size_t j = 0; j < plane; ++j) {
          s1 += d[j];
          s2 += static_cast<double>(d[j]) * xh[j];
        }
      }
      dbeta[ci] += static_cast<T>(s1);
      dgamma[ci] += static_cast<T>(s2);
      const T g_istd = gamma[ci] * inv_std_[ci];
      const T m1 = static_cast<T>(s1 / static_cast<double>(count));
      const T m2 = static_cast<T>(s2 / static_cast<double>(count));
      for (int s = 0; s < dy.n; ++s) {
        const T* d = dy.sample(s) + ci * plane;
        const T* xh = xhat_.sample(s) + ci * plane;
        T* dxp = dx.sample(s) + ci * plane;
        for (size_t j = 0; j < plane; ++j)
          dxp[j] = g_istd * (d[j] - m1 - xh[j] * m2);
      }
    }
    return dx;
  }

  void collect_params(ParamSet<T>& out, const std::string& prefix) {
    out.push_back({prefix + ".gamma", &gamma, &dgamma, true});
    out.push_back({prefix + ".beta", &beta, &dbeta, true});
    out.push_back({prefix + ".running_mean", &running_mean, nullptr, false});
    out.push_back({prefix + ".running_var", &running_var, nullptr, false});
  }
};

// ---------------------------------------------------------------------------

template <class T>
struct ReLU {
  Tensor<T> y_;

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> y = Tensor<T>::uninitialized(x.n, x.c, x.h, x.w);
    const size_t total = x.size();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(total); ++i)
      y.v[i] = x.v[i] > T(0) ? x.v[i] : T(0);
    if (train) y_ = y;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx = Tensor<T>::uninitialized(dy.n, dy.c, dy.h, dy.w);
    const size_t total = dy.size();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(total); ++i)
      dx.v[i] = y_.v[i] > T(0) ? dy.v[i] : T(0);
    return dx;
  }
};

// ---------------------------------------------------------------------------
// Linear over [n x in] tensors (h = w = 1)

template <class T>
struct Linear {
  int in = 0, out = 0;
  std::vector<T> W, b, dW, db;  // W: [out x in]
  Tensor<T> x_;

  void init(int in_, int out_, Rng& rng) {
    in = in_; out = out_;
    W.assign(static_cast<size_t>(out) * in, T(0));
    b.assign(out, T(0));
    dW.assign(W.size(), T(0));
    db.assign(b.size(), T(0));
    fan_in_uniform_init(W, in, rng);
    fan_in_uniform_init(b, in, rng);
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    require(static_cast<int>(x.chw()) == in, ErrorKind::invalid_argument,
            "Linear: input dimension mismatch");
    if (train) x_ = x;
    Tensor<T> y = Tensor<T>::uninitialized(x.n, out, 1, 1);
    constexpr int MBLK = 8;
    const int nblk = (x.n + MBLK - 1) / MBLK;
#pragma omp parallel for schedule(static)
    for (int blk = 0; blk < nblk; ++blk) {
      const int s0 = blk * MBLK;
      const int rows = std::min(x.n, s0 + MBLK) - s0;
      gemm_nt(x.data() + static_cast<size_t>(s0) * in, W.data(),
              y.data() + static_cast<size_t>(s0) * out, rows, out, in);
    }
#pragma omp parallel for schedule(static)
    for (int s = 0; s < x.n; ++s) {
      T* ys = y.sample(s);
      for (int m = 0; m < out; ++m) ys[m] += b[m];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx = Tensor<T>::uninitialized(x_.n, x_.c, x_.h, x_.w);
    constexpr int MBLK = 8;
    const int nblk = (dy.n + MBLK - 1) / MBLK;
#pragma omp parallel for schedule(static)
    for (int blk = 0; blk < nblk; ++blk) {
      const int s0 = blk * MBLK;
      const int rows = std::min(dy.n, s0 + MBLK) - s0;
      gemm_nn(dy.data() + static_cast<size_t>(s0) * out, W.data(),
              dx.data() + static_cast<size_t>(s0) * in, rows, in, out);
    }
    // dW = dy^T x, rows split across threads, samples accumulated in order
    constexpr int WBLK = 16;
    const int wblk = (out + WBLK - 1) / WBLK;
#pragma omp parallel for schedule(static)
    for (int blk = 0; blk < wblk; ++blk) {
      const int m0 = blk * WBLK;
      const int mend = std::min(out, m0 + WBLK);
      for (int s = 0; s < dy.n; ++s) {
        const T* dys = dy.sample(s);
        const T* xs = x_.sample(s);
        for (int m = m0; m < mend; ++m) {
          const T g = dys[m];
          T* wrow = dW.data() + static_cast<size_t>(m) * in;
          for (int j = 0; j < in; ++j) wrow[j] += g * xs[j];
        }
      }
      for (int m = m0; m < mend; ++m) {
        T sum = 0;
        for (int s = 0; s < dy.n; ++s) sum += dy.sample(s)[m];
        db[m] += sum;
      }
    }
    return dx;
  }

  void collect_params(ParamSet<T>& out_set, const std::string& prefix) {
    out_set.push_back({prefix + ".weight", &W, &dW, true});
    out_set.push_back({prefix + ".bias", &b, &db, true});
  }

  size_t num_params() const { return W.size() + b.size(); }
};

// ---------------------------------------------------------------------------

template <class T>
struct GlobalAvgPool {
  int in_h = 0, in_w = 0;

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    if (train) { in_h = x.h; in_w = x.w; }
    Tensor<T> y = Tensor<T>::uninitialized(x.n, x.c, 1, 1);
    const size_t plane = x.plane();
#pragma omp parallel for schedule(static)
    for (int s = 0; s < x.n; ++s) {
      const T* xs = x.sample(s);
      T* ys = y.sample(s);
      for (int ci = 0; ci < x.c; ++ci) {
        T sum = 0;
        const T* p = xs + static_cast<size_t>(ci) * plane;
        for (size_t j = 0; j < plane; ++j) sum += p[j];
        ys[ci] = sum / static_cast<T>(plane);
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx = Tensor<T>::uninitialized(dy.n, dy.c, in_h, in_w);
    const size_t plane = static_cast<size_t>(in_h) * in_w;
    const T scale = T(1) / static_cast<T>(plane);
#pragma omp parallel for schedule(static)
    for (int s = 0; s < dy.n; ++s) {
      const T* dys = dy.sample(s);
      T* dxs = dx.sample(s);
      for (int ci = 0; ci < dy.c; ++ci) {
        const T g = dys[ci] * scale;
        T* p = dxs + static_cast<size_t>(ci) * plane;
        for (size_t j = 0; j < plane; ++j) p[j] = g;
      }
    }
    return dx;
  }
};

// ---------------------------------------------------------------------------
// SGD with (optionally Nesterov) momentum over a ParamSet.

template <class T>
struct Sgd {
  T momentum = static_cast<T>(0.9);
  bool nesterov = true;
  T clip_norm = T(0);  // 0 disables global-norm gradient clipping
  std::vector<std::vector<T>> velocity;
  ParamSet<T>* params = nullptr;

  void attach(ParamSet<T>& ps) {
    params = &ps;
    velocity.clear();
    for (auto& p : ps)
      velocity.push_back(std::vector<T>(p.trainable ? p.value->size() : 0, T(0)));
  }

  void clip_gradients() {
    if (clip_norm <= T(0)) return;
    double sq = 0;
    for (auto& p : *params) {
      if (!p.trainable) continue;
      for (T g : *p.grad) sq += static_cast<double>(g) * g;
    }
    const double norm = std::sqrt(sq);
    if (norm <= static_cast<double>(clip_norm)) return;
    const T scale = static_cast<T>(static_cast<double>(clip_norm) / norm);
    for (auto& p : *params) {
      if (!p.trainable) continue;
      for (T& g : *p.grad) g *= scale;
    }
  }

  void step(T lr) {
    clip_gradients();
    for (size_t i = 0; i < params->size(); ++i) {
      auto& p = (*params)[i];
      if (!p.trainable) continue;
      auto& v = velocity[i];
      auto& val = *p.value;
      auto& g = *p.grad;
      const long long n = static_cast<long long>(val.size());
#pragma omp parallel for schedule(static) if (n > 16384)
      for (long long j = 0; j < n; ++j) {
        v[j] = momentum * v[j] + g[j];
        const T upd = nesterov ? g[j] + momentum * v[j] : v[j];
        val[j] -= lr * upd;
        g[j] = T(0);
      }
    }
  }

  void zero_grad() {
    for (auto& p : *params) {
      if (p.trainable) std::fill(p.grad->begin(), p.grad->end(), T(0));
    }
  }
};

// Linear warmup into cosine decay; step and total are 0-based step counts.
inline double lr_at(size_t step, size_t total, double base, double warmup_frac) {
  if (total == 0) return base;
  const size_t warm = static_cast<size_t>(warmup_frac * static_cast<double>(total));
  if (warm > 0 && step < warm)
    return base * static_cast<double>(step + 1) / static_cast<double>(warm);
  if (total <= warm) return base;
  const double t = static_cast<double>(step - warm) / static_cast<double>(total - warm);
  return base * 0.5 * (1.0 + std::cos(3.14159265358979323846 * t));
}

// Horizontal mirror along the W axis.
template <class T>
Tensor<T> flip_horizontal(const Tensor<T>& x) {
  Tensor<T> y = Tensor<T>::uninitialized(x.n, x.c, x.h, x.w);
#pragma omp parallel for schedule(static)
  for (int s = 0; s < x.n; ++s) {
    const T* xs = x.sample(s);
    T* ys = y.sample(s);
    for (int ci = 0; ci < x.c; ++ci) {
      for (int yy = 0; yy < x.h; ++yy) {
        const T* src = xs + (static_cast<size_t>(ci) * x.h + yy) * x.w;
        T* dst = ys + (static_cast<size_t>(ci) * x.h + yy) * x.w;
        for (int xx = 0; xx < x.w; ++xx) dst[xx] = src[x.w - 1 - xx];
      }
    }
  }
  return y;
}

}  // namespace glae::nn

#endif
