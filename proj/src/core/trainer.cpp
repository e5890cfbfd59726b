// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/trainer.hpp"

#include <cmath>
#include <sstream>

#include "core/labels.hpp"
#include "core/sampling.hpp"

namespace glae::train {

namespace {

struct LossParts {
  double l_loc = 0;
  double l_hol = 0;
  double l_sum = 0;
};

struct TrainSetup {
  int batch_size;
  double lr;
  double stage2_lr;
  double momentum;
  bool nesterov;
  double warmup_frac;
  double clip_norm;
  bool enable_er;
  bool aug_flip;
  double aug_noise;
  double aug_tilt;
  float local_weight;
  float hol_weight;
  double sigma;
};

TrainSetup read_setup(const cfg::RunConfig& rc) {
  TrainSetup s;
  s.batch_size = rc.get_int("train.batch_size");
  require(s.batch_size >= 2, ErrorKind::config, "train.batch_size must be >= 2");
  s.lr = rc.get_double("train.lr");
  s.stage2_lr = rc.get_double("train.stage2_lr");
  s.momentum = rc.get_double("train.momentum");
  s.nesterov = rc.get_bool("train.nesterov");
  s.warmup_frac = rc.get_double("train.warmup_frac");
  s.clip_norm = rc.get_double("train.clip_norm");
  s.enable_er = rc.get_bool("train.enable_er");
  s.aug_flip = rc.get_bool("train.aug_flip");
  s.aug_noise = rc.get_double("train.aug_noise");
  s.aug_tilt = rc.get_double("train.aug_tilt");
  s.local_weight = static_cast<float>(rc.get_double("pa.local_weight"));
  s.hol_weight = static_cast<float>(rc.get_double("pa.holistic_weight"));
  s.sigma = rc.get_double("labels.sigma");
  return s;
}

// label distributions per age, cast to float once
std::vector<std::vector<float>> make_targets(int K, double sigma) {
  std::vector<std::vector<float>> z(static_cast<size_t>(K) + 1);
  for (int y = 0; y <= K; ++y) {
    const auto zd = labels::make_label_distribution(y, sigma, K);
    z[y].assign(zd.begin(), zd.end());
  }
  return z;
}

nn::Tensor<float> assemble_batch(const synth::Dataset& ds, std::span<const int> sample_ids,
                                 const TrainSetup& s, uint64_t aug_seed, bool augment) {
  const int S = ds.image_size;
  auto x = nn::Tensor<float>::uninitialized(static_cast<int>(sample_ids.size()), 1, S, S);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(sample_ids.size()); ++i) {
    const auto& img = ds.samples[sample_ids[i]].image;
    float* dst = x.sample(static_cast<int>(i));
    for (size_t j = 0; j < img.size(); ++j) dst[j] = synth::normalize_pixel(img[j]);
    if (!augment) continue;
    Rng rng(mix_seed(aug_seed, static_cast<uint64_t>(sample_ids[i])));
    if (s.aug_flip && rng.uniform() < 0.5) {
      for (int y = 0; y < S; ++y) {
        float* row = dst + static_cast<size_t>(y) * S;
        for (int a = 0, b = S - 1; a < b; ++a, --b) std::swap(row[a], row[b]);
      }
    }
    if (s.aug_noise > 0) {
      for (size_t j = 0; j < img.size(); ++j)
        dst[j] += static_cast<float>(s.aug_noise * rng.gaussian());
    }
    if (s.aug_tilt > 0) {
      // lighting-direction jitter matching the data's tilt nuisance
      const float t = static_cast<float>(s.aug_tilt * rng.gaussian());
      const float c = (S - 1) / 2.0f;
      for (int y = 0; y < S; ++y) {
        float* row = dst + static_cast<size_t>(y) * S;
        for (int xx = 0; xx < S; ++xx) row[xx] += t * (xx - c) / (S / 2.0f);
      }
    }
  }
  return x;
}

// Forward + loss + gradient for one batch through the given head. Returns the
// summed (not yet batch-averaged) loss parts; gradients flow back into every
// layer cache. When update_backbone is false the backbone runs in eval mode
// and its parameters receive no gradient.
LossParts batch_loss_backward(model::Model<float>& net, model::Head<float>& head,
                              const nn::Tensor<float>& x, std::span<const int> ages,
                              const std::vector<std::vector<float>>& targets,
                              const TrainSetup& s, bool update_backbone) {
  const int B = x.n;
  nn::Tensor<float> feats = net.backbone.forward(x, update_backbone);
  auto fwd = head.forward(feats, true);

  nn::Tensor<float> dlogits(fwd.logits.n, fwd.logits.c, 1, 1);
  nn::Tensor<float> dscore;
  const int C = fwd.logits.c;
  std::vector<double> loc_losses(B, 0.0), hol_losses(B, 0.0);

  if (head.kind == model::HeadKind::glae) {
    dscore = nn::Tensor<float>(fwd.score.n, fwd.score.c, fwd.score.h, fwd.score.w);
    const size_t plane = fwd.score.plane();
    const float loc_scale = s.local_weight / (static_cast<float>(B) * plane);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < B; ++b) {
      thread_local std::vector<float> p;
      p.resize(C);
      const float* sc = fwd.score.sample(b);
      float* dsc = dscore.sample(b);
      const float* z = targets[ages[b]].data();
      double acc = 0;
      for (size_t px = 0; px < plane; ++px) {
        pa::softmax_strided(sc + px, C, plane, p.data(), size_t{1});
        acc += pa::dist_loss_grad(p.data(), size_t{1}, z, C, ages[b], s.enable_er,
                                  loc_scale, dsc + px, plane);
      }
      loc_losses[b] = acc / static_cast<double>(plane);
    }
  }

  const float hol_scale = s.hol_weight / static_cast<float>(B);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < B; ++b) {
    thread_local std::vector<float> p;
    p.resize(C);
    const float* lg = fwd.logits.sample(b);
    pa::softmax_strided(lg, C, size_t{1}, p.data(), size_t{1});
    hol_losses[b] = pa::dist_loss_grad(p.data(), size_t{1}, targets[ages[b]].data(), C,
                                       ages[b], s.enable_er, hol_scale,
                                       dlogits.sample(b), size_t{1});
  }

  LossParts out;
  for (int b = 0; b < B; ++b) {
    out.l_loc += loc_losses[b];
    out.l_hol += hol_losses[b];
  }
  out.l_sum = out.l_loc + out.l_hol;

  nn::Tensor<float> dfeats = head.backward(dscore, dlogits);
  if (update_backbone) net.backbone.backward(dfeats);
  return out;
}

std::string diagnose_batch(std::span<const int> sample_ids, const synth::Dataset& ds,
                           const LossParts& parts) {
  std::ostringstream os;
  os << "non-finite training loss (l_loc = " << parts.l_loc
     << ", l_hol = " << parts.l_hol << "); last batch sample ids:";
  for (int id : sample_ids) os << " " << ds.samples[id].id;
  return os.str();
}

std::vector<double> run_epochs(model::Model<float>& net, model::Head<float>& head,
                               nn::ParamSet<float>& params, const cfg::RunConfig& rc,
                               const synth::Dataset& ds, const TrainSetup& s, int stage,
                               int epochs) {
  nn::Sgd<float> sgd;
  sgd.momentum = static_cast<float>(s.momentum);
  sgd.nesterov = s.nesterov;
  sgd.clip_norm = static_cast<float>(s.clip_norm);
  sgd.attach(params);

  const uint64_t seed = rc.seed();
  const auto targets = make_targets(ds.K(), s.sigma);
  const size_t n_per_epoch = ds.train_ids.size();
  const size_t steps_per_epoch = (n_per_epoch + s.batch_size - 1) / s.batch_size;
  const size_t total_steps = steps_per_epoch * static_cast<size_t>(epochs);

  std::vector<double> history;
  size_t step = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const uint64_t epoch_seed = mix_seed(seed, static_cast<uint64_t>(stage),
                                         static_cast<uint64_t>(epoch));
    std::vector<int> order;
    if (stage == 1) {
      order = sampling::instance_balanced_indices(ds.train_index, epoch_seed, n_per_epoch,
                                                  sampling::EpochMode::permutation);
    } else {
      order = sampling::class_balanced_indices(ds.train_index, epoch_seed, n_per_epoch);
    }
    // sampler ids are positions within the train subset
    for (auto& id : order) id = ds.train_ids[id];

    const uint64_t aug_seed = mix_seed(seed, 0xA0A0, static_cast<uint64_t>(stage),
                                       static_cast<uint64_t>(epoch));
    double epoch_loss = 0;
    size_t epoch_count = 0;
    for (size_t off = 0; off < order.size(); off += s.batch_size, ++step) {
      const size_t take = std::min(static_cast<size_t>(s.batch_size), order.size() - off);
      if (take < 2) continue;  // batch-norm needs at least two samples
      std::span<const int> ids(order.data() + off, take);
      nn::Tensor<float> x = assemble_batch(ds, ids, s, aug_seed, true);
      std::vector<int> ages(take);
      for (size_t i = 0; i < take; ++i) ages[i] = ds.samples[ids[i]].age;

      const LossParts parts = batch_loss_backward(net, head, x, ages, targets, s,
                                                  /*update_backbone=*/stage == 1);
      if (!std::isfinite(parts.l_sum))
        fail(ErrorKind::state, diagnose_batch(ids, ds, parts));
      epoch_loss += parts.l_sum;
      epoch_count += take;

      const double base_lr = stage == 1 || s.stage2_lr <= 0 ? s.lr : s.stage2_lr;
      sgd.step(static_cast<float>(nn::lr_at(step, total_steps, base_lr, s.warmup_frac)));
    }
    history.push_back(epoch_loss / static_cast<double>(epoch_count));
  }
  return history;
}

}  // namespace

nn::Tensor<float> make_eval_batch(const synth::Dataset& ds, std::span<const int> sample_ids) {
  TrainSetup dummy{};
  return assemble_batch(ds, sample_ids, dummy, 0, false);
}

TrainedModel train_stage1(const cfg::RunConfig& rc, const synth::Dataset& ds) {
  tune_runtime_allocator();
  const TrainSetup s = read_setup(rc);
  const int epochs = rc.get_int("train.stage1_epochs");
  require(epochs >= 0, ErrorKind::config, "train.stage1_epochs must be >= 0");
  require(!ds.train_ids.empty(), ErrorKind::invalid_argument, "stage 1: empty train split");

  TrainedModel tm;
  tm.config = rc;
  tm.seed = rc.seed();
  tm.stage = 1;
  tm.net.build(rc.model_config(), tm.seed);
  require(tm.net.cfg.backbone.input_size == ds.image_size &&
              tm.net.cfg.backbone.input_channels == 1,
          ErrorKind::config, "stage 1: backbone input shape does not match dataset");
  require(tm.net.cfg.K == ds.K(), ErrorKind::config,
          "stage 1: labels.k does not match dataset age range");

  nn::ParamSet<float> params;
  tm.net.backbone.collect_params(params, "backbone");
  tm.net.vanilla.collect_params(params, "head.vanilla");
  tm.history_stage1 = run_epochs(tm.net, tm.net.vanilla, params, rc, ds, s, 1, epochs);
  return tm;
}

TrainedModel train_stage2(const cfg::RunConfig& rc, const synth::Dataset& ds,
                          const TrainedModel& stage1) {
  require(stage1.stage == 1, ErrorKind::invalid_argument,
          "train_stage2 requires a stage-1 checkpoint");
  tune_runtime_allocator();
  const TrainSetup s = read_setup(rc);
  const int epochs = rc.get_int("train.stage2_epochs");
  require(epochs >= 0, ErrorKind::config, "train.stage2_epochs must be >= 0");
  require(!ds.train_ids.empty(), ErrorKind::invalid_argument, "stage 2: empty train split");

  TrainedModel tm;
  tm.net = stage1.net;
  tm.config = rc;
  tm.seed = rc.seed();
  tm.stage = 2;
  tm.history_stage1 = stage1.history_stage1;

  const std::string init = rc.get("train.balanced_init");
  require(init == "warm" || init == "cold", ErrorKind::config,
          "train.balanced_init must be warm or cold");
  tm.net.add_balanced_head(init == "warm", tm.seed);

  nn::ParamSet<float> params;
  tm.net.head(true).collect_params(params, "head.balanced");
  tm.history_stage2 = run_epochs(tm.net, tm.net.head(true), params, rc, ds, s, 2, epochs);
  return tm;
}

}  // namespace glae::train
