// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/common.hpp"

namespace fs = std::filesystem;

namespace glae::synth {

std::vector<int> longtail_counts(const SynthProfile& profile, int K) {
  require(K >= 0, ErrorKind::invalid_argument, "longtail_counts: K must be >= 0");
  require(profile.head_count >= 1 && profile.tail_min >= 1, ErrorKind::invalid_argument,
          "longtail_counts: counts must be >= 1");
  require(profile.decay > 0, ErrorKind::invalid_argument, "longtail_counts: decay must be > 0");
  std::vector<int> counts(static_cast<size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) {
    const double d = std::abs(k - profile.head_center);
    const double c = profile.head_count * std::exp(-d / profile.decay);
    counts[k] = std::max(profile.tail_min, static_cast<int>(std::llround(c)));
  }
  return counts;
}

uint64_t sample_seed(uint64_t global_seed, int age, int within_class_index) {
  return mix_seed(global_seed, 0x5EED, static_cast<uint64_t>(age),
                  static_cast<uint64_t>(within_class_index));
}

double base_luminance(int age, const SynthConfig& cfg) {
  return cfg.lum_min + (cfg.lum_max - cfg.lum_min) * static_cast<double>(age) /
                           static_cast<double>(cfg.K);
}

std::vector<uint8_t> render_age_image(int age, uint64_t per_sample_seed,
                                      const SynthConfig& cfg) {
  require(age >= 0 && age <= cfg.K, ErrorKind::invalid_argument,
          "render_age_image: age out of range");
  const int S = cfg.image_size;
  const double center = (S - 1) / 2.0;
  const double r_max = S / 2.0 - 2.0;
  const int n_rings = age / 10 + 1;

  Rng rng(per_sample_seed);
  std::vector<double> radii(n_rings);
  for (int i = 0; i < n_rings; ++i) {
    radii[i] = r_max * static_cast<double>(i + 1) / static_cast<double>(n_rings) +
               rng.uniform(-cfg.ring_jitter, cfg.ring_jitter);
  }
  // lighting: a shared offset drawn per sample; the dc part of the additive
  // noise is what keeps the luminance cue from being noise-free after
  // averaging over the whole image
  const double dc = cfg.noise_dc > 0 ? cfg.noise_dc * rng.gaussian() : 0.0;
  const double tilt = cfg.noise_tilt > 0 ? cfg.noise_tilt * rng.gaussian() : 0.0;

  // rings tighten as they crowd so dense decades do not smear into a blob
  const double ring_w = std::clamp(0.4 * r_max / n_rings, 0.6, 1.2);
  std::vector<double> layer(static_cast<size_t>(S) * S, 0.0);
  double layer_sum = 0.0;
  for (int y = 0; y < S; ++y) {
    for (int x = 0; x < S; ++x) {
      const double dy = y - center;
      const double dx = x - center;
      const double d = std::sqrt(dx * dx + dy * dy);
      double v = 0.0;
      for (int i = 0; i < n_rings; ++i) {
        const double dd = d - radii[i];
        v += cfg.ring_amplitude * std::exp(-dd * dd / (2.0 * ring_w * ring_w));
      }
      layer[static_cast<size_t>(y) * S + x] = v;
      layer_sum += v;
    }
  }
  const double layer_mean = layer_sum / static_cast<double>(S * S);

  const double base = base_luminance(age, cfg);
  std::vector<uint8_t> img(static_cast<size_t>(S) * S);
  for (size_t i = 0; i < img.size(); ++i) {
    const int x = static_cast<int>(i) % S;
    double v = base + (layer[i] - layer_mean) + dc + tilt * (x - center) / (S / 2.0);
    if (cfg.noise > 0) v += cfg.noise * rng.gaussian();
    const long q = std::lround(v);
    img[i] = static_cast<uint8_t>(std::clamp(q, 0L, 255L));
  }
  return img;
}

void write_pgm(const std::string& path, const std::vector<uint8_t>& pixels, int w, int h) {
  require(pixels.size() == static_cast<size_t>(w) * h, ErrorKind::invalid_argument,
          "write_pgm: pixel count does not match dimensions");
  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::io, "write_pgm: cannot open " + path);
  f << "P5\n" << w << " " << h << "\n255\n";
  f.write(reinterpret_cast<const char*>(pixels.data()),
          static_cast<std::streamsize>(pixels.size()));
  require(f.good(), ErrorKind::io, "write_pgm: write failed for " + path);
}

std::vector<uint8_t> read_pgm(const std::string& path, int* w, int* h) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::io, "read_pgm: cannot open " + path);
  std::string magic;
  f >> magic;
  require(magic == "P5", ErrorKind::format, "read_pgm: not a binary pgm: " + path);
  auto next_int = [&](const char* what) {
    // skip whitespace and '#' comments
    int c;
    while ((c = f.peek()) != EOF) {
      if (c == '#') {
        std::string line;
        std::getline(f, line);
      } else if (std::isspace(c)) {
        f.get();
      } else {
        break;
      }
    }
    long v = -1;
    f >> v;
    require(f.good() && v >= 0, ErrorKind::format,
            std::string("read_pgm: bad ") + what + " in " + path);
    return static_cast<int>(v);
  };
  const int width = next_int("width");
  const int height = next_int("height");
  const int maxval = next_int("maxval");
  require(maxval == 255, ErrorKind::format, "read_pgm: expected maxval 255 in " + path);
  f.get();  // single whitespace after header
  std::vector<uint8_t> pixels(static_cast<size_t>(width) * height);
  f.read(reinterpret_cast<char*>(pixels.data()),
         static_cast<std::streamsize>(pixels.size()));
  require(f.gcount() == static_cast<std::streamsize>(pixels.size()), ErrorKind::format,
          "read_pgm: truncated pixel data in " + path);
  if (w) *w = width;
  if (h) *h = height;
  return pixels;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string snapshot_text(const SynthConfig& cfg, int total) {
  std::ostringstream os;
  os << "format = glae-synth-v1\n";
  os << "k = " << cfg.K << "\n";
  os << "image_size = " << cfg.image_size << "\n";
  os << "noise = " << fmt_double(cfg.noise) << "\n";
  os << "noise_dc = " << fmt_double(cfg.noise_dc) << "\n";
  os << "noise_tilt = " << fmt_double(cfg.noise_tilt) << "\n";
  os << "ring_amplitude = " << fmt_double(cfg.ring_amplitude) << "\n";
  os << "ring_jitter = " << fmt_double(cfg.ring_jitter) << "\n";
  os << "lum_min = " << fmt_double(cfg.lum_min) << "\n";
  os << "lum_max = " << fmt_double(cfg.lum_max) << "\n";
  os << "head_center = " << cfg.profile.head_center << "\n";
  os << "head_count = " << cfg.profile.head_count << "\n";
  os << "tail_min = " << cfg.profile.tail_min << "\n";
  os << "decay = " << fmt_double(cfg.profile.decay) << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "test_fraction = " << fmt_double(cfg.test_fraction) << "\n";
  os << "total_samples = " << total << "\n";
  return os.str();
}

std::string sample_id(int running_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", running_index);
  return buf;
}

void validate_split_config(const SynthConfig& cfg) {
  require(cfg.test_fraction >= 0.0 && cfg.test_fraction < 1.0, ErrorKind::config,
          "synth: test_fraction must be in [0, 1)");
}

// Per-class stratified split; pure function of (seed, class sizes). Classes
// keep at least one sample on each side whenever they have >= 2 samples.
void split_class(uint64_t seed, int age, int n_k, double test_fraction,
                 std::vector<int>* test_slots) {
  test_slots->clear();
  if (test_fraction <= 0.0 || n_k == 0) return;
  require(n_k >= 2, ErrorKind::config,
          "synth: class " + std::to_string(age) +
              " has a single sample and cannot appear in both splits; "
              "use tail_min >= 2");
  int t = static_cast<int>(std::llround(n_k * test_fraction));
  t = std::clamp(t, 1, n_k - 1);
  std::vector<int> order(n_k);
  for (int i = 0; i < n_k; ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x511F, static_cast<uint64_t>(age)));
  rng.shuffle(order.data(), order.size());
  test_slots->assign(order.begin(), order.begin() + t);
}

}  // namespace

void generate_dataset(const SynthConfig& cfg, const std::string& out_dir) {
  require(cfg.K >= 0 && cfg.image_size >= 8, ErrorKind::config,
          "synth: invalid K or image_size");
  validate_split_config(cfg);
  const auto counts = longtail_counts(cfg.profile, cfg.K);
  if (cfg.test_fraction > 0.0) {
    for (int k = 0; k <= cfg.K; ++k)
      require(counts[k] >= 2, ErrorKind::config,
              "synth: class " + std::to_string(k) +
                  " has fewer than 2 samples but the split needs both sides; "
                  "use tail_min >= 2");
  }
  int total = 0;
  for (int c : counts) total += c;

  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "images", ec);
  require(!ec, ErrorKind::io, "synth: cannot create " + out_dir);

  struct Job {
    int age;
    int within;
    std::string id;
  };
  std::vector<Job> jobs;
  jobs.reserve(total);
  int running = 0;
  for (int k = 0; k <= cfg.K; ++k)
    for (int i = 0; i < counts[k]; ++i) jobs.push_back({k, i, sample_id(running++)});

  std::vector<std::vector<uint8_t>> rendered(jobs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long long j = 0; j < static_cast<long long>(jobs.size()); ++j) {
    rendered[j] = render_age_image(jobs[j].age,
                                   sample_seed(cfg.seed, jobs[j].age, jobs[j].within), cfg);
  }

  std::ostringstream manifest;
  manifest << "id,filename,age\n";
  for (size_t j = 0; j < jobs.size(); ++j) {
    const std::string rel = "images/" + jobs[j].id + ".pgm";
    write_pgm((fs::path(out_dir) / rel).string(), rendered[j], cfg.image_size,
              cfg.image_size);
    manifest << jobs[j].id << "," << rel << "," << jobs[j].age << "\n";
  }

  {
    std::ofstream f(fs::path(out_dir) / "labels.csv");
    require(f.good(), ErrorKind::io, "synth: cannot write labels.csv");
    f << manifest.str();
  }
  {
    std::ofstream f(fs::path(out_dir) / "config.snapshot");
    require(f.good(), ErrorKind::io, "synth: cannot write config.snapshot");
    f << snapshot_text(cfg, total);
  }
}

namespace {

SynthConfig parse_snapshot(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), ErrorKind::io, "synth: cannot open " + path);
  SynthConfig cfg;
  std::string line;
  bool format_seen = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::format,
            "synth: malformed snapshot line: " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "format") {
        require(val == "glae-synth-v1", ErrorKind::format,
                "synth: unsupported dataset format '" + val + "'");
        format_seen = true;
      } else if (key == "k") cfg.K = std::stoi(val);
      else if (key == "image_size") cfg.image_size = std::stoi(val);
      else if (key == "noise") cfg.noise = std::stod(val);
      else if (key == "noise_dc") cfg.noise_dc = std::stod(val);
      else if (key == "noise_tilt") cfg.noise_tilt = std::stod(val);
      else if (key == "ring_amplitude") cfg.ring_amplitude = std::stod(val);
      else if (key == "ring_jitter") cfg.ring_jitter = std::stod(val);
      else if (key == "lum_min") cfg.lum_min = std::stod(val);
      else if (key == "lum_max") cfg.lum_max = std::stod(val);
      else if (key == "head_center") cfg.profile.head_center = std::stoi(val);
      else if (key == "head_count") cfg.profile.head_count = std::stoi(val);
      else if (key == "tail_min") cfg.profile.tail_min = std::stoi(val);
      else if (key == "decay") cfg.profile.decay = std::stod(val);
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "test_fraction") cfg.test_fraction = std::stod(val);
      else if (key == "total_samples") { /* informational */ }
      else fail(ErrorKind::format, "synth: unknown snapshot key '" + key + "'");
    } catch (const std::invalid_argument&) {
      fail(ErrorKind::format, "synth: bad value for snapshot key '" + key + "'");
    }
  }
  require(format_seen, ErrorKind::format, "synth: snapshot missing format marker");
  return cfg;
}

}  // namespace

Dataset load_dataset(const std::string& dir) {
  Dataset ds;
  ds.cfg = parse_snapshot((fs::path(dir) / "config.snapshot").string());
  ds.image_size = ds.cfg.image_size;
  validate_split_config(ds.cfg);

  std::ifstream f(fs::path(dir) / "labels.csv");
  require(f.good(), ErrorKind::io, "synth: cannot open labels.csv in " + dir);
  std::string line;
  require(static_cast<bool>(std::getline(f, line)), ErrorKind::format,
          "synth: empty labels.csv");
  require(line == "id,filename,age" || line == "id,filename,age\r", ErrorKind::format,
          "synth: unexpected labels.csv header: " + line);
  int row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? 0 : c1 + 1);
    require(c1 != std::string::npos && c2 != std::string::npos, ErrorKind::format,
            "synth: malformed labels.csv row " + std::to_string(row));
    Sample s;
    s.id = line.substr(0, c1);
    const std::string rel = line.substr(c1 + 1, c2 - c1 - 1);
    try {
      s.age = std::stoi(line.substr(c2 + 1));
    } catch (const std::exception&) {
      fail(ErrorKind::format, "synth: bad age in labels.csv row " + std::to_string(row));
    }
    require(s.age >= 0 && s.age <= ds.cfg.K, ErrorKind::format,
            "synth: age out of range in labels.csv row " + std::to_string(row));
    const fs::path img = fs::path(dir) / rel;
    require(fs::exists(img), ErrorKind::format,
            "synth: labels.csv row " + std::to_string(row) +
                " references missing file " + rel);
    int w = 0, h = 0;
    s.image = read_pgm(img.string(), &w, &h);
    require(w == ds.image_size && h == ds.image_size, ErrorKind::format,
            "synth: image size mismatch for " + rel);
    ds.samples.push_back(std::move(s));
  }
  require(!ds.samples.empty(), ErrorKind::format, "synth: dataset has no samples");

  // rebuild per-class membership in file order, then derive the split
  std::vector<std::vector<int>> by_class(static_cast<size_t>(ds.cfg.K) + 1);
  for (size_t i = 0; i < ds.samples.size(); ++i)
    by_class[ds.samples[i].age].push_back(static_cast<int>(i));

  std::vector<int> test_slots;
  for (int k = 0; k <= ds.cfg.K; ++k) {
    const auto& members = by_class[k];
    if (members.empty()) continue;
    split_class(ds.cfg.seed, k, static_cast<int>(members.size()), ds.cfg.test_fraction,
                &test_slots);
    std::vector<bool> is_test(members.size(), false);
    for (int slot : test_slots) is_test[slot] = true;
    for (size_t i = 0; i < members.size(); ++i)
      (is_test[i] ? ds.test_ids : ds.train_ids).push_back(members[i]);
  }
  std::sort(ds.train_ids.begin(), ds.train_ids.end());
  std::sort(ds.test_ids.begin(), ds.test_ids.end());

  std::vector<int> train_classes(ds.train_ids.size());
  for (size_t i = 0; i < ds.train_ids.size(); ++i)
    train_classes[i] = ds.samples[ds.train_ids[i]].age;
  ds.train_index = sampling::DatasetIndex::build(train_classes, ds.cfg.K);
  return ds;
}

}  // namespace glae::synth
