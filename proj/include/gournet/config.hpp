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

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gournet/error.hpp"
#include "gournet/layers.hpp"

namespace gournet {

/// A sequential architecture: per-sample input shape plus the layer stack.
struct ModelConfig {
  Shape input;  // H, W, C
  std::vector<LayerSpec> layers;
  /// Source line of each layer (1-based), or 0 when built in code.
  std::vector<std::size_t> lines;
};

namespace detail {

inline std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

inline std::size_t parse_positive(std::string_view word, std::size_t line, const char* what) {
  std::size_t v = 0;
  const auto* end = word.data() + word.size();
  const auto [ptr, ec] = std::from_chars(word.data(), end, v);
  if (ec != std::errc() || ptr != end || v == 0) {
    throw ParseError(line, std::string("expected a positive integer for ") + what + ", got '" +
                               std::string(word) + "'");
  }
  return v;
}

inline Padding parse_padding(std::string_view word, std::size_t line) {
  if (word == "same") return Padding::kSame;
  if (word == "valid") return Padding::kValid;
  throw ParseError(line, "padding must be 'same' or 'valid', got '" + std::string(word) + "'");
}

inline Activation parse_activation(std::string_view word, std::size_t line) {
  if (word == "relu") return Activation::kReLU;
  if (word == "softmax") return Activation::kSoftmax;
  if (word == "none") return Activation::kNone;
  throw ParseError(line, "activation must be relu, softmax or none, got '" + std::string(word) + "'");
}

inline void expect_arity(const std::vector<std::string_view>& w, std::size_t n, std::size_t line,
                         const char* usage) {
  if (w.size() != n) throw ParseError(line, std::string("expected '") + usage + "'");
}

}  // namespace detail

/// Parses the line-based architecture format:
///
///     # comment
///     input H W C
///     conv F KH KW same|valid relu|none
///     maxpool H W
///     batchnorm                # accounting-only
///     flatten
///     dense U relu|softmax|none
///
/// `input` must come first and the stack must end in `dense K softmax`.
/// Shapes are inferred eagerly; any failure is reported with its line number.
inline ModelConfig parse_config(std::string_view text) {
  ModelConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_input = false;
  std::size_t last_line = 1;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto w = detail::split_words(line);
    if (w.empty()) continue;
    last_line = line_no;

    if (!have_input) {
      if (w[0] != "input") throw ParseError(line_no, "config must start with 'input H W C'");
      detail::expect_arity(w, 4, line_no, "input H W C");
      cfg.input = {detail::parse_positive(w[1], line_no, "height"), detail::parse_positive(w[2], line_no, "width"),
                   detail::parse_positive(w[3], line_no, "channels")};
      have_input = true;
      continue;
    }

    LayerSpec spec;
    if (w[0] == "conv") {
      detail::expect_arity(w, 6, line_no, "conv F KH KW PAD ACT");
      spec = LayerSpec::conv(detail::parse_positive(w[1], line_no, "filters"),
                             detail::parse_positive(w[2], line_no, "kernel height"),
                             detail::parse_positive(w[3], line_no, "kernel width"), detail::parse_padding(w[4], line_no),
                             detail::parse_activation(w[5], line_no));
    } else if (w[0] == "maxpool") {
      detail::expect_arity(w, 3, line_no, "maxpool H W");
      spec = LayerSpec::maxpool(detail::parse_positive(w[1], line_no, "window height"),
                                detail::parse_positive(w[2], line_no, "window width"));
    } else if (w[0] == "flatten") {
      detail::expect_arity(w, 1, line_no, "flatten");
      spec = LayerSpec::flatten();
    } else if (w[0] == "dense") {
      detail::expect_arity(w, 3, line_no, "dense U ACT");
      spec = LayerSpec::dense(detail::parse_positive(w[1], line_no, "units"), detail::parse_activation(w[2], line_no));
    } else if (w[0] == "batchnorm") {
      detail::expect_arity(w, 1, line_no, "batchnorm");
      spec = LayerSpec::batchnorm();
    } else if (w[0] == "input") {
      throw ParseError(line_no, "duplicate 'input' line");
    } else {
      throw ParseError(line_no, "unknown keyword '" + std::string(w[0]) + "'");
    }
    cfg.layers.push_back(spec);
    cfg.lines.push_back(line_no);
  }

  if (!have_input) throw ParseError(1, "missing 'input H W C' line");
  if (cfg.layers.empty()) throw ParseError(last_line, "config has no layers");

  Shape shape = cfg.input;
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const LayerSpec& s = cfg.layers[i];
    const bool last = i + 1 == cfg.layers.size();
    if (s.activation == Activation::kSoftmax && !(last && s.kind == LayerKind::kDense)) {
      throw ParseError(cfg.lines[i], "softmax is only allowed on the final dense layer");
    }
    try {
      shape = infer_output_shape(s, shape);
    } catch (const ShapeError& e) {
      throw ParseError(cfg.lines[i], layer_name(s, i + 1) + ": " + e.what());
    }
  }
  const LayerSpec& head = cfg.layers.back();
  if (head.kind != LayerKind::kDense || head.activation != Activation::kSoftmax) {
    throw ParseError(cfg.lines.back(), "final layer must be 'dense K softmax'");
  }
  return cfg;
}

inline ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Canonical text form; parse_config(to_text(c)) reproduces c's shape and layers.
inline std::string to_text(const ModelConfig& cfg) {
  std::ostringstream out;
  out << "input " << cfg.input.at(0) << ' ' << cfg.input.at(1) << ' ' << cfg.input.at(2) << '\n';
  for (const auto& s : cfg.layers) {
    switch (s.kind) {
      case LayerKind::kConv2D:
        out << "conv " << s.filters << ' ' << s.kernel_h << ' ' << s.kernel_w << ' ' << to_string(s.padding) << ' '
            << to_string(s.activation) << '\n';
        break;
      case LayerKind::kMaxPool2D:
        out << "maxpool " << s.pool_h << ' ' << s.pool_w << '\n';
        break;
      case LayerKind::kFlatten:
        out << "flatten\n";
        break;
      case LayerKind::kDense:
        out << "dense " << s.units << ' ' << to_string(s.activation) << '\n';
        break;
      case LayerKind::kBatchNorm:
        out << "batchnorm\n";
        break;
      default:
        throw ArgumentError(std::string("to_text: ") + to_string(s.kind) + " has no config keyword");
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Parameter audit

using ParamReport = ParamSummary;

inline ParamReport audit(const ModelConfig& cfg) { return param_count(cfg.layers, cfg.input); }

/// 683656 -> "683,656".
inline std::string format_count(std::uint64_t n) {
  std::string digits = std::to_string(n);
  for (std::size_t i = digits.size(); i > 3; i -= 3) digits.insert(i - 3, ",");
  return digits;
}

inline std::string format_shape(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + (s.size() == 1 ? ",)" : ")");
}

/// Layer / output shape / parameter table followed by the totals.
inline std::string render_report(const ParamReport& report) {
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::ostringstream out;
  out << pad("Layer (type)", 32) << pad("Output Shape", 24) << "Param #\n" << std::string(72, '=') << '\n';
  for (const auto& row : report.layers) {
    out << pad(row.name, 32) << pad(format_shape(row.output_shape), 24) << format_count(row.params.total) << '\n';
  }
  out << std::string(72, '=') << '\n';
  out << "Total params: " << format_count(report.totals.total) << '\n';
  out << "Trainable params: " << format_count(report.totals.trainable) << '\n';
  out << "Non-trainable params: " << format_count(report.totals.total - report.totals.trainable) << '\n';
  return out.str();
}

}  // namespace gournet
