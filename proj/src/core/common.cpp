// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/common.hpp"

#include <cmath>
#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace glae {

void tune_runtime_allocator() {
#ifdef __GLIBC__
  // The training loop allocates and frees multi-megabyte activation buffers
  // every batch; keep glibc from handing those pages back to the kernel.
  static bool done = false;
  if (done) return;
  done = true;
  mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, -1);
#endif
}

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::state: return "state";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

uint64_t Rng::below(uint64_t n) {
  if (n == 0) fail(ErrorKind::invalid_argument, "Rng::below: n must be >= 1");
  const uint64_t reject_below = (0ULL - n) % n;  // 2^64 mod n
  while (true) {
    uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    if (static_cast<uint64_t>(m) >= reject_below)
      return static_cast<uint64_t>(m >> 64);
  }
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0,1] so the log is finite
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double t = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

}  // namespace glae
