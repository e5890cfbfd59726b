// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/model.hpp"

namespace glae::model {

int BackboneConfig::out_channels() const { return widths.back(); }

int BackboneConfig::out_size() const {
  int s = input_size;
  for (int st : strides) {
    // 3x3 conv, pad 1: floor((s - 1) / stride) + 1
    s = (s - 1) / st + 1;
  }
  return s;
}

void BackboneConfig::validate() const {
  require(input_channels >= 1, ErrorKind::config, "backbone: input_channels must be >= 1");
  require(input_size >= 8, ErrorKind::config, "backbone: input_size must be >= 8");
  require(!widths.empty(), ErrorKind::config, "backbone: at least one block required");
  require(widths.size() == strides.size(), ErrorKind::config,
          "backbone: widths and strides must have equal length");
  for (int w : widths)
    require(w >= 1, ErrorKind::config, "backbone: block width must be >= 1");
  for (int s : strides)
    require(s == 1 || s == 2, ErrorKind::config, "backbone: block stride must be 1 or 2");
}

BackboneConfig paper_scale_backbone_config() {
  BackboneConfig c;
  c.input_channels = 3;
  c.input_size = 224;
  c.widths = {64, 128, 256, 512, 512};
  c.strides = {2, 2, 2, 2, 2};
  return c;
}

const char* head_kind_name(HeadKind k) {
  return k == HeadKind::glae ? "glae" : "gap_linear";
}

HeadKind head_kind_from_name(const std::string& name) {
  if (name == "glae") return HeadKind::glae;
  if (name == "gap_linear") return HeadKind::gap_linear;
  fail(ErrorKind::config, "unknown head kind '" + name + "' (expected glae or gap_linear)");
}

void ModelConfig::validate() const {
  backbone.validate();
  require(K >= 1, ErrorKind::config, "model: K must be >= 1");
  require(r >= 1, ErrorKind::config, "model: r must be >= 1");
  if (head == HeadKind::glae) {
    require(backbone.out_channels() % (r * r) == 0, ErrorKind::config,
            "model: backbone output channels " + std::to_string(backbone.out_channels()) +
                " not divisible by r^2 = " + std::to_string(r * r));
  }
  require(proj_depth >= 0, ErrorKind::config, "model: projection depth must be >= 0");
  if (proj_depth > 0)
    require(proj_width >= 1, ErrorKind::config, "model: projection width must be >= 1");
}

}  // namespace glae::model
