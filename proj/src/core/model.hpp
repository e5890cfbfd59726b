// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference backbone (stacked conv / batch-norm / relu blocks) and the two
// classifier heads that share it: the standard head (feature rearrangement
// conv + MLP projection) and a plain GAP + linear head kept for ablations.

#ifndef GLAE_CORE_MODEL_HPP
#define GLAE_CORE_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "core/pixel_aux.hpp"
#include "core/rearrange.hpp"

namespace glae::model {

struct BackboneConfig {
  int input_channels = 1;
  int input_size = 64;  // square input
  std::vector<int> widths = {16, 32, 64, 128};
  std::vector<int> strides = {2, 2, 2, 1};

  int out_channels() const;
  int out_size() const;  // spatial extent of the emitted feature map
  void validate() const;
};

// Documentation-scale shape: the contract a ResNet-18-class extractor meets
// (3 x 224 x 224 in, 512 x 7 x 7 out).
BackboneConfig paper_scale_backbone_config();

enum class HeadKind { glae, gap_linear };

const char* head_kind_name(HeadKind k);
HeadKind head_kind_from_name(const std::string& name);

struct ModelConfig {
  int K = 100;  // ages 0..K -> K+1 categories
  BackboneConfig backbone;
  HeadKind head = HeadKind::glae;
  int r = 8;
  fr::FrConvSpec fr_conv;  // resolved against r at build time
  int proj_depth = 0;
  int proj_width = 512;

  int categories() const { return K + 1; }
  void validate() const;
};

template <class T>
struct Backbone {
  struct Block {
    nn::Conv2d<T> conv;
    nn::BatchNorm2d<T> bn;
    nn::ReLU<T> relu;
  };
  BackboneConfig cfg;
  std::vector<Block> blocks;

  void build(const BackboneConfig& c, uint64_t seed) {
    c.validate();
    cfg = c;
    blocks.clear();
    blocks.resize(c.widths.size());
    int cin = c.input_channels;
    for (size_t i = 0; i < c.widths.size(); ++i) {
      Rng rng(mix_seed(seed, 0xB0B0, static_cast<uint64_t>(i)));
      blocks[i].conv.init(cin, c.widths[i], 3, c.strides[i], 1, rng);
      blocks[i].bn.init(c.widths[i]);
      cin = c.widths[i];
    }
  }

  nn::Tensor<T> forward(const nn::Tensor<T>& x, bool train) {
    require(x.c == cfg.input_channels && x.h == cfg.input_size && x.w == cfg.input_size,
            ErrorKind::invalid_argument, "backbone: input shape mismatch");
    nn::Tensor<T> h = x;
    for (auto& b : blocks) {
      h = b.conv.forward(h, train);
      h = b.bn.forward(h, train);
      h = b.relu.forward(h, train);
    }
    return h;
  }

  nn::Tensor<T> backward(const nn::Tensor<T>& dy) {
    nn::Tensor<T> g = dy;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
      g = it->relu.backward(g);
      g = it->bn.backward(g);
      g = it->conv.backward(g);
    }
    return g;
  }

  void collect_params(nn::ParamSet<T>& out, const std::string& prefix) {
    for (size_t i = 0; i < blocks.size(); ++i) {
      const std::string p = prefix + ".block" + std::to_string(i);
      blocks[i].conv.collect_params(out, p + ".conv");
      blocks[i].bn.collect_params(out, p + ".bn");
    }
  }
};

// One classifier head. For HeadKind::glae the forward path is
// rearrange -> categorizing conv -> (score map, projected holistic logits);
// for gap_linear it is global average pool -> linear logits (no score map).
template <class T>
struct Head {
  HeadKind kind = HeadKind::glae;
  int K = 100;
  int r = 8;
  fr::FrConvSpec conv_spec;

  nn::Conv2d<T> fr_conv;
  pa::Projection<T> proj;

  nn::GlobalAvgPool<T> gap;
  nn::Linear<T> fc;

  int score_h = 0, score_w = 0;  // resolved at build

  struct Forward {
    nn::Tensor<T> score;   // [n, K+1, H', W'] (glae only)
    nn::Tensor<T> logits;  // [n, K+1]
  };

  void build(const ModelConfig& mc, int feat_c, int feat_hw, uint64_t seed) {
    kind = mc.head;
    K = mc.K;
    r = mc.r;
    Rng rng_conv(mix_seed(seed, 0xF0CA, 1));
    Rng rng_proj(mix_seed(seed, 0xF0CA, 2));
    if (kind == HeadKind::glae) {
      conv_spec = mc.fr_conv;
      conv_spec.resolve(r);
      require(feat_c % (r * r) == 0, ErrorKind::config,
              "head: feature channels " + std::to_string(feat_c) +
                  " not divisible by r^2 = " + std::to_string(r * r));
      const int rc = feat_c / (r * r);
      const int rhw = feat_hw * r;
      require(rhw >= conv_spec.kernel, ErrorKind::config,
              "head: fr conv kernel exceeds rearranged map extent");
      fr_conv.init(rc, mc.categories(), conv_spec.kernel, conv_spec.stride, 0, rng_conv);
      score_h = score_w = (rhw - conv_spec.kernel) / conv_spec.stride + 1;
      proj.init(mc.categories() * score_h * score_w, mc.categories(),
                mc.proj_depth, mc.proj_width, rng_proj);
    } else {
      fc.init(feat_c, mc.categories(), rng_conv);
    }
  }

  Forward forward(const nn::Tensor<T>& features, bool train) {
    Forward out;
    if (kind == HeadKind::glae) {
      nn::Tensor<T> re = fr::rearrange(features, r);
      out.score = fr_conv.forward(re, train);
      nn::Tensor<T> flat = out.score;
      flat.c = static_cast<int>(out.score.chw());
      flat.h = flat.w = 1;
      out.logits = proj.forward(flat, train);
    } else {
      nn::Tensor<T> pooled = gap.forward(features, train);
      out.logits = fc.forward(pooled, train);
    }
    return out;
  }

  // dscore: gradient reaching the score map directly (local branch); empty
  // tensor when absent. dlogits: gradient on the holistic logits.
  nn::Tensor<T> backward(const nn::Tensor<T>& dscore, const nn::Tensor<T>& dlogits) {
    if (kind == HeadKind::glae) {
      nn::Tensor<T> dflat = proj.backward(dlogits);
      nn::Tensor<T> ds = dscore;
      const size_t total = dflat.size();
      for (size_t i = 0; i < total; ++i) ds.v[i] += dflat.v[i];
      nn::Tensor<T> dre = fr_conv.backward(ds);
      return fr::inverse_rearrange(dre, r);
    }
    nn::Tensor<T> dpool = fc.backward(dlogits);
    return gap.backward(dpool);
  }

  void collect_params(nn::ParamSet<T>& out, const std::string& prefix) {
    if (kind == HeadKind::glae) {
      fr_conv.collect_params(out, prefix + ".fr_conv");
      proj.collect_params(out, prefix + ".proj");
    } else {
      fc.collect_params(out, prefix + ".fc");
    }
  }
};

template <class T>
struct Model {
  ModelConfig cfg;
  Backbone<T> backbone;
  Head<T> vanilla;
  std::optional<Head<T>> balanced;

  void build(const ModelConfig& mc, uint64_t seed) {
    mc.validate();
    cfg = mc;
    backbone.build(mc.backbone, mix_seed(seed, 0xBACB));
    vanilla.build(mc, mc.backbone.out_channels(), mc.backbone.out_size(),
                  mix_seed(seed, 0xEAD0, 1));
    balanced.reset();
  }

  void add_balanced_head(bool warm_start, uint64_t seed) {
    require(!balanced.has_value(), ErrorKind::state, "balanced head already present");
    if (warm_start) {
      balanced = vanilla;
    } else {
      Head<T> h;
      h.build(cfg, cfg.backbone.out_channels(), cfg.backbone.out_size(),
              mix_seed(seed, 0xEAD0, 2));
      balanced = std::move(h);
    }
  }

  Head<T>& head(bool use_balanced) {
    if (!use_balanced) return vanilla;
    require(balanced.has_value(), ErrorKind::state,
            "balanced head unavailable: run training stage 2 first");
    return *balanced;
  }

  // Holistic category distributions for a batch, eval mode.
  std::vector<std::vector<double>> predict(const nn::Tensor<T>& images, bool use_balanced) {
    nn::Tensor<T> feats = backbone.forward(images, false);
    auto fwd = head(use_balanced).forward(feats, false);
    std::vector<std::vector<double>> out(images.n);
    std::vector<T> tmp(fwd.logits.c);
    for (int s = 0; s < images.n; ++s) {
      pa::softmax_strided(fwd.logits.sample(s), fwd.logits.c, size_t{1},
                          tmp.data(), size_t{1});
      out[s].assign(tmp.begin(), tmp.end());
    }
    return out;
  }
};

}  // namespace glae::model

#endif
