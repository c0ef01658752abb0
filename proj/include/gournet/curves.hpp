/* Copyright 2026 The GourNet-CPP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gournet/error.hpp"
#include "gournet/trainer.hpp"

namespace gournet {

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Panel {
  double left, top, width, height;
  double y_min, y_max;
  std::size_t epochs;

  double x(std::size_t epoch) const {
    if (epochs <= 1) return left + width / 2;
    return left + width * static_cast<double>(epoch - 1) / static_cast<double>(epochs - 1);
  }
  double y(double v) const { return top + height * (1.0 - (v - y_min) / (y_max - y_min)); }
};

inline void draw_panel(std::string& svg, const Panel& p, const std::string& title, const std::string& y_label,
                       const std::vector<EpochRecord>& h, double EpochRecord::*train, double EpochRecord::*val,
                       const std::string& key) {
  svg += "<g class=\"panel\" data-panel=\"" + key + "\">\n";
  svg += "<text x=\"" + fmt("%.2f", p.left + p.width / 2) + "\" y=\"" + fmt("%.2f", p.top - 14) +
         "\" text-anchor=\"middle\" font-size=\"15\" font-weight=\"bold\">" + title + "</text>\n";
  // axes
  svg += "<line x1=\"" + fmt("%.2f", p.left) + "\" y1=\"" + fmt("%.2f", p.top + p.height) + "\" x2=\"" +
         fmt("%.2f", p.left + p.width) + "\" y2=\"" + fmt("%.2f", p.top + p.height) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt("%.2f", p.left) + "\" y1=\"" + fmt("%.2f", p.top) + "\" x2=\"" + fmt("%.2f", p.left) +
         "\" y2=\"" + fmt("%.2f", p.top + p.height) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = p.y_min + (p.y_max - p.y_min) * i / 4.0;
    const double y = p.y(v);
    svg += "<line x1=\"" + fmt("%.2f", p.left - 4) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" + fmt("%.2f", p.left) +
           "\" y2=\"" + fmt("%.2f", y) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", p.left - 7) + "\" y=\"" + fmt("%.2f", y + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + fmt("%.2f", v) + "</text>\n";
  }
  const std::size_t step = std::max<std::size_t>(1, (p.epochs + 9) / 10);
  for (std::size_t e = 1; e <= p.epochs; e += step) {
    const double x = p.x(e);
    svg += "<line x1=\"" + fmt("%.2f", x) + "\" y1=\"" + fmt("%.2f", p.top + p.height) + "\" x2=\"" + fmt("%.2f", x) +
           "\" y2=\"" + fmt("%.2f", p.top + p.height + 4) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", p.top + p.height + 17) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + std::to_string(e) + "</text>\n";
  }
  svg += "<text x=\"" + fmt("%.2f", p.left + p.width / 2) + "\" y=\"" + fmt("%.2f", p.top + p.height + 36) +
         "\" text-anchor=\"middle\" font-size=\"12\">Epoch</text>\n";
  svg += "<text x=\"" + fmt("%.2f", p.left - 46) + "\" y=\"" + fmt("%.2f", p.top + p.height / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " + fmt("%.2f", p.left - 46) + " " +
         fmt("%.2f", p.top + p.height / 2) + ")\">" + y_label + "</text>\n";

  auto series = [&](double EpochRecord::*field, const std::string& name, const char* color, const char* dash) {
    std::string pts;
    std::string dots;
    for (const auto& r : h) {
      const std::string xs = fmt("%.2f", p.x(r.epoch)), ys = fmt("%.2f", p.y(r.*field));
      if (!pts.empty()) pts += ' ';
      pts += xs + "," + ys;
      dots += "<circle cx=\"" + xs + "\" cy=\"" + ys + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    }
    svg += "<polyline data-series=\"" + name + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"" +
           (dash[0] ? std::string(" stroke-dasharray=\"") + dash + "\"" : std::string()) + " points=\"" + pts + "\"/>\n";
    svg += dots;
  };
  series(train, "train_" + key, "#1f77b4", "");
  series(val, "val_" + key, "#ff7f0e", "6,4");

  // legend
  const double lx = p.left + p.width - 120, ly = p.top + 8;
  svg += "<rect x=\"" + fmt("%.2f", lx) + "\" y=\"" + fmt("%.2f", ly) +
         "\" width=\"112\" height=\"42\" fill=\"white\" stroke=\"#999\"/>\n";
  svg += "<line x1=\"" + fmt("%.2f", lx + 8) + "\" y1=\"" + fmt("%.2f", ly + 14) + "\" x2=\"" + fmt("%.2f", lx + 30) +
         "\" y2=\"" + fmt("%.2f", ly + 14) + "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  svg += "<text x=\"" + fmt("%.2f", lx + 36) + "\" y=\"" + fmt("%.2f", ly + 18) +
         "\" font-size=\"11\">Training</text>\n";
  svg += "<line x1=\"" + fmt("%.2f", lx + 8) + "\" y1=\"" + fmt("%.2f", ly + 31) + "\" x2=\"" + fmt("%.2f", lx + 30) +
         "\" y2=\"" + fmt("%.2f", ly + 31) + "\" stroke=\"#ff7f0e\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
  svg += "<text x=\"" + fmt("%.2f", lx + 36) + "\" y=\"" + fmt("%.2f", ly + 35) +
         "\" font-size=\"11\">Validation</text>\n";
  svg += "</g>\n";
}

}  // namespace detail

/// Two-panel SVG (accuracy, loss) with training and validation series.
/// Output bytes depend only on `history`.
inline std::string render_curves_svg(const std::vector<EpochRecord>& history) {
  if (history.empty()) throw ArgumentError("emit_curves: empty history");
  double max_loss = 0;
  for (const auto& r : history) max_loss = std::max({max_loss, r.train_loss, r.val_loss});
  const double loss_top = max_loss > 0 ? max_loss * 1.05 : 1.0;
  const std::size_t epochs = history.back().epoch;

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"400\" viewBox=\"0 0 960 400\" "
      "font-family=\"sans-serif\">\n<rect width=\"960\" height=\"400\" fill=\"white\"/>\n";
  detail::draw_panel(svg, {80, 50, 360, 280, 0.0, 1.0, epochs}, "Training and Validation Accuracy", "Accuracy",
                     history, &EpochRecord::train_accuracy, &EpochRecord::val_accuracy, "accuracy");
  detail::draw_panel(svg, {560, 50, 360, 280, 0.0, loss_top, epochs}, "Training and Validation Loss", "Loss", history,
                     &EpochRecord::train_loss, &EpochRecord::val_loss, "loss");
  svg += "</svg>\n";
  return svg;
}

inline void emit_curves(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  const std::string svg = render_curves_svg(history);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << svg;
  if (!out) throw DataError("short write to " + path.string());
}

}  // namespace gournet
