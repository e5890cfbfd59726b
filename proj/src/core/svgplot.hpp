// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0
//
// Text-only SVG emission for the two report figures: per-class sample counts
// with per-class MAE overlaid (dashed CMAE reference line), and per-group
// classifier usage ratios. No timestamps or other run-varying bytes, so
// identical inputs give identical files.

#ifndef GLAE_CORE_SVGPLOT_HPP
#define GLAE_CORE_SVGPLOT_HPP

#include <string>
#include <vector>

#include "core/metrics.hpp"

namespace glae::plot {

std::string report_svg(const metrics::MetricsReport& report);

struct UsageBar {
  std::string label;
  int count = 0;
  double vanilla_ratio = 0;
};

std::string usage_svg(const std::vector<UsageBar>& bars);

}  // namespace glae::plot

#endif
