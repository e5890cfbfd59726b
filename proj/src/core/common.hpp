// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLAE_CORE_COMMON_HPP
#define GLAE_CORE_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace glae {

enum class ErrorKind {
  invalid_argument,
  config,
  io,
  format,
  state,
  internal,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& msg);

// glibc malloc tuning for the large, frequently recycled activation buffers;
// idempotent, called from pipeline and trainer entry points.
void tune_runtime_allocator();

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

// splitmix64. All seed derivation goes through mix_seed so that independent
// random streams (per stage, per epoch, per sample) never collide by accident.
constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t mix_seed(uint64_t h) { return splitmix64(h); }

template <class... Rest>
constexpr uint64_t mix_seed(uint64_t h, uint64_t x, Rest... rest) {
  return mix_seed(splitmix64(h ^ splitmix64(x)), rest...);
}

// Deterministic RNG. The engine (mt19937_64) has a standardized output
// sequence; the distributions below are hand-rolled because the stdlib ones
// are implementation-defined and would break cross-toolchain reproducibility.
class Rng {
public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n), n >= 1; Lemire's multiply-shift with rejection
  uint64_t below(uint64_t n);

  // standard normal via Box-Muller
  double gaussian();

  template <class T>
  void shuffle(T* data, size_t n) {
    for (size_t i = n; i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(data[i - 1], data[j]);
    }
  }

private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace glae

#endif
