// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic long-tailed synthetic age-image benchmark. Each image encodes
// its age through two redundant monotone cues: a base luminance level
// proportional to age/K, and floor(age/10) + 1 concentric rings (the ring
// layer is made zero-mean before compositing so the luminance cue stays
// exact). Construction is horizontally symmetric up to pixel noise, so a
// mirrored image is a valid image of the same age.
//
// On-disk layout: images/<id>.pgm (binary 8-bit P5), labels.csv with header
// id,filename,age, and config.snapshot (key = value text). The train/test
// split is not stored; it is a pure function of the snapshot and is
// recomputed at load time.

#ifndef GLAE_CORE_SYNTH_HPP
#define GLAE_CORE_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "core/sampling.hpp"

namespace glae::synth {

struct SynthProfile {
  int head_center = 35;
  int head_count = 1000;
  int tail_min = 10;
  double decay = 8.0;
};

struct SynthConfig {
  int K = 100;
  int image_size = 64;
  double noise = 8.0;           // per-pixel additive Gaussian std, 8-bit units
  double noise_dc = 6.0;        // per-sample luminance-offset std (lighting)
  double noise_tilt = 10.0;     // per-sample horizontal lighting-tilt std,
                                // 8-bit units at the image edge; odd-symmetric
                                // so it never moves the mean luminance and a
                                // horizontal flip exactly negates it
  double ring_amplitude = 42.0;
  double ring_jitter = 1.5;     // uniform radius jitter, pixels
  double lum_min = 45.0;        // base luminance at age 0
  double lum_max = 205.0;       // base luminance at age K
  SynthProfile profile;
  uint64_t seed = 1234;
  double test_fraction = 0.1;
};

// N_k = max(tail_min, round(head_count * exp(-|k - head_center| / decay)))
std::vector<int> longtail_counts(const SynthProfile& profile, int K);

uint64_t sample_seed(uint64_t global_seed, int age, int within_class_index);

std::vector<uint8_t> render_age_image(int age, uint64_t per_sample_seed,
                                      const SynthConfig& cfg);

// closed-form mean luminance of a noise-free rendering (the ring layer is
// zero-mean by construction; quantization adds at most +-1)
double base_luminance(int age, const SynthConfig& cfg);

struct Sample {
  std::string id;
  int age = 0;
  std::vector<uint8_t> image;
};

struct Dataset {
  SynthConfig cfg;
  int image_size = 0;
  std::vector<Sample> samples;
  std::vector<int> train_ids;  // indices into samples
  std::vector<int> test_ids;
  sampling::DatasetIndex train_index;

  int K() const { return cfg.K; }
};

void generate_dataset(const SynthConfig& cfg, const std::string& out_dir);

Dataset load_dataset(const std::string& dir);

// preprocessing applied when images enter the network
inline float normalize_pixel(uint8_t v) {
  return (static_cast<float>(v) - 127.5f) / 128.0f;
}

// pgm helpers (exposed for tests)
void write_pgm(const std::string& path, const std::vector<uint8_t>& pixels, int w, int h);
std::vector<uint8_t> read_pgm(const std::string& path, int* w, int* h);

}  // namespace glae::synth

#endif
