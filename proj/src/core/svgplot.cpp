// Copyright 2026 The glae authors
// SPDX-License-Identifier: Apache-2.0

#include "core/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/common.hpp"

namespace glae::plot {

namespace {

constexpr int kWidth = 900;
constexpr int kHeight = 420;
constexpr int kMarginL = 60, kMarginR = 60, kMarginT = 30, kMarginB = 50;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void text(std::ostringstream& os, double x, double y, const std::string& s,
          const char* anchor = "middle", const char* fill = "#333") {
  os << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"12\" "
     << "font-family=\"sans-serif\" text-anchor=\"" << anchor << "\" fill=\"" << fill
     << "\">" << s << "</text>\n";
}

}  // namespace

std::string report_svg(const metrics::MetricsReport& report) {
  const int K = static_cast<int>(report.per_class_count.size()) - 1;
  require(K >= 0, ErrorKind::invalid_argument, "report_svg: empty report");
  const double plot_w = kWidth - kMarginL - kMarginR;
  const double plot_h = kHeight - kMarginT - kMarginB;
  const double x0 = kMarginL, y0 = kMarginT + plot_h;

  int max_count = 1;
  double max_mae = 1e-9;
  for (int k = 0; k <= K; ++k) {
    max_count = std::max(max_count, report.per_class_count[k]);
    if (report.per_class_mae[k].has_value())
      max_mae = std::max(max_mae, *report.per_class_mae[k]);
  }
  max_mae = std::max(max_mae, report.cmae) * 1.1;

  const double bw = plot_w / (K + 1);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // count bars (left axis)
  for (int k = 0; k <= K; ++k) {
    const int c = report.per_class_count[k];
    if (c == 0) continue;
    const double h = plot_h * c / max_count;
    os << "<rect x=\"" << num(x0 + k * bw) << "\" y=\"" << num(y0 - h) << "\" width=\""
       << num(std::max(bw * 0.9, 0.5)) << "\" height=\"" << num(h)
       << "\" fill=\"#7fa8d9\"/>\n";
  }

  // per-class MAE polyline (right axis), split at empty classes
  std::ostringstream seg;
  bool open = false;
  auto flush_seg = [&]() {
    if (open) {
      os << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" points=\""
         << seg.str() << "\"/>\n";
      seg.str("");
      open = false;
    }
  };
  for (int k = 0; k <= K; ++k) {
    if (!report.per_class_mae[k].has_value()) {
      flush_seg();
      continue;
    }
    const double y = y0 - plot_h * (*report.per_class_mae[k]) / max_mae;
    seg << num(x0 + (k + 0.5) * bw) << "," << num(y) << " ";
    open = true;
  }
  flush_seg();

  // dashed CMAE reference
  const double cy = y0 - plot_h * report.cmae / max_mae;
  os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(cy) << "\" x2=\""
     << num(x0 + plot_w) << "\" y2=\"" << num(cy)
     << "\" stroke=\"#c0392b\" stroke-dasharray=\"6,4\" stroke-width=\"1.2\"/>\n";

  // axes and labels
  os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\""
     << num(x0 + plot_w) << "\" y2=\"" << num(y0) << "\" stroke=\"#333\"/>\n";
  for (int k = 0; k <= K; k += std::max(1, (K + 1) / 10))
    text(os, x0 + (k + 0.5) * bw, y0 + 16, std::to_string(k));
  text(os, x0 + plot_w / 2, kHeight - 12, "age");
  text(os, x0, kMarginT - 8, "samples/class (bars, max " + std::to_string(max_count) + ")",
       "start", "#7fa8d9");
  text(os, x0 + plot_w, kMarginT - 8,
       "per-class MAE (line), CMAE " + num(report.cmae) + " (dashed)", "end", "#c0392b");
  text(os, x0 + plot_w / 2, kMarginT + 4,
       "MAE " + num(report.mae) + "  CMAE " + num(report.cmae));
  os << "</svg>\n";
  return os.str();
}

std::string usage_svg(const std::vector<UsageBar>& bars) {
  require(!bars.empty(), ErrorKind::invalid_argument, "usage_svg: no groups");
  const double plot_w = kWidth - kMarginL - kMarginR;
  const double plot_h = kHeight - kMarginT - kMarginB;
  const double x0 = kMarginL, y0 = kMarginT + plot_h;
  const double bw = plot_w / bars.size();

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t i = 0; i < bars.size(); ++i) {
    const double vr = std::clamp(bars[i].vanilla_ratio, 0.0, 1.0);
    const double vh = plot_h * vr;
    const double x = x0 + i * bw + bw * 0.1;
    const double w = bw * 0.8;
    // stacked: vanilla (blue) on top of balanced (red)
    os << "<rect x=\"" << num(x) << "\" y=\"" << num(kMarginT) << "\" width=\"" << num(w)
       << "\" height=\"" << num(plot_h - vh) << "\" fill=\"#d98b7f\"/>\n";
    os << "<rect x=\"" << num(x) << "\" y=\"" << num(y0 - vh) << "\" width=\"" << num(w)
       << "\" height=\"" << num(vh) << "\" fill=\"#7fa8d9\"/>\n";
    text(os, x + w / 2, y0 + 16, bars[i].label);
    text(os, x + w / 2, y0 + 32, "n=" + std::to_string(bars[i].count));
    text(os, x + w / 2, y0 - vh - 4, num(100.0 * vr) + "%");
  }
  os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\""
     << num(x0 + plot_w) << "\" y2=\"" << num(y0) << "\" stroke=\"#333\"/>\n";
  text(os, x0, kMarginT - 8, "vanilla usage (blue) vs balanced (red)", "start");
  os << "</svg>\n";
  return os.str();
}

}  // namespace glae::plot
