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

#include <csetjmp>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

#include <jpeglib.h>

#include "gournet/error.hpp"
#include "gournet/rng.hpp"
#include "gournet/tensor.hpp"

namespace gournet {

/// H x W x 3 RGB image. Values are in [0, 255] straight out of the decoder and
/// in [0, 1] after rescale().
using Image = Tensor<float>;

inline void check_image(const Image& img, const char* op) {
  if (img.rank() != 3 || img.dim(2) != 3) {
    throw ArgumentError(std::string(op) + ": expected an HxWx3 image, got " + shape_str(img.shape()));
  }
}

// ---------------------------------------------------------------------------
// Decoding

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Binary PGM (P5) and PPM (P6), 8- or 16-bit. Grayscale is replicated to RGB.
inline Image decode_pnm(const std::vector<unsigned char>& buf, const std::string& name) {
  std::size_t pos = 2;
  auto skip_space = [&] {
    while (pos < buf.size()) {
      if (buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
      } else if (std::isspace(buf[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_space();
    if (pos >= buf.size() || !std::isdigit(buf[pos])) throw DataError(name + ": malformed PNM header");
    std::size_t v = 0;
    while (pos < buf.size() && std::isdigit(buf[pos])) {
      v = v * 10 + (buf[pos++] - '0');
      if (v > (1u << 24)) throw DataError(name + ": PNM header value too large");
    }
    return v;
  };
  const bool gray = buf[1] == '5';
  const std::size_t w = read_uint();
  const std::size_t h = read_uint();
  const std::size_t maxval = read_uint();
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) throw DataError(name + ": bad PNM dimensions");
  ++pos;  // exactly one whitespace byte before the raster
  const std::size_t channels = gray ? 1 : 3;
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  const std::size_t need = w * h * channels * bytes;
  if (buf.size() < pos + need) throw DataError(name + ": truncated PNM raster");
  Image img({h, w, 3});
  const double k = 255.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < w * h; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t s = i * channels + (gray ? 0 : c);
      const std::size_t raw = bytes == 1 ? buf[pos + s] : (buf[pos + 2 * s] << 8 | buf[pos + 2 * s + 1]);
      img[i * 3 + c] = maxval == 255 ? static_cast<float>(raw) : static_cast<float>(raw * k);
    }
  }
  return img;
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

/// Returns false and fills `message` on failure. No object with a destructor
/// lives in this frame, so the longjmp out of libjpeg is well defined.
inline bool decode_jpeg_rgb(const unsigned char* data, std::size_t len, std::vector<unsigned char>& out,
                            std::size_t& w, std::size_t& h, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    std::snprintf(message, JMSG_LENGTH_MAX, "%s", jerr.message);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(len));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  w = cinfo.output_width;
  h = cinfo.output_height;
  out.resize(w * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

}  // namespace detail

/// Decodes a baseline JPEG or binary PPM/PGM file into [0, 255] RGB.
/// The format is sniffed from the leading bytes, not the extension.
inline Image load_image(const std::filesystem::path& path) {
  const auto buf = detail::read_file(path);
  const std::string name = path.string();
  if (buf.size() >= 2 && buf[0] == 'P' && (buf[1] == '6' || buf[1] == '5')) return detail::decode_pnm(buf, name);
  if (buf.size() >= 3 && buf[0] == 0xFF && buf[1] == 0xD8 && buf[2] == 0xFF) {
    std::vector<unsigned char> rgb;
    std::size_t w = 0, h = 0;
    char message[JMSG_LENGTH_MAX] = {};
    if (!detail::decode_jpeg_rgb(buf.data(), buf.size(), rgb, w, h, message)) {
      throw DataError(name + ": JPEG decode failed: " + message);
    }
    if (w == 0 || h == 0) throw DataError(name + ": empty JPEG");
    return Image({h, w, 3}, std::vector<float>(rgb.begin(), rgb.end()));
  }
  throw DataError(name + ": unsupported image format (expected JPEG or binary PPM)");
}

/// Writes a P6 file; values are rounded and clamped to [0, 255].
inline void save_ppm(const Image& img, const std::filesystem::path& path) {
  check_image(img, "save_ppm");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P6\n" << img.dim(1) << ' ' << img.dim(0) << "\n255\n";
  std::vector<unsigned char> raster(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    raster[i] = static_cast<unsigned char>(std::lround(std::clamp(img[i], 0.0f, 255.0f)));
  }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw DataError("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// Geometry

/// Bilinear resize with half-pixel centers: output pixel y samples source row
/// (y + 0.5) * in_h / out_h - 0.5, clamped to the image.
inline Image resize_bilinear(const Image& img, std::size_t out_h, std::size_t out_w) {
  if (img.empty()) throw ArgumentError("resize_bilinear: empty input");
  check_image(img, "resize_bilinear");
  if (out_h == 0 || out_w == 0) throw ArgumentError("resize_bilinear: output dims must be >= 1");
  const std::size_t in_h = img.dim(0), in_w = img.dim(1);
  if (in_h == out_h && in_w == out_w) return img;

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
      const double s = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(s);
      t[i] = {lo, std::min(lo + 1, in - 1), s - static_cast<double>(lo)};
    }
    return t;
  };
  const auto ty = taps(in_h, out_h);
  const auto tx = taps(in_w, out_w);
  Image out({out_h, out_w, 3});
  for (std::size_t y = 0; y < out_h; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        auto px = [&](std::size_t r, std::size_t q) { return static_cast<double>(img[(r * in_w + q) * 3 + c]); };
        const double top = px(ty[y].lo, tx[x].lo) * (1 - tx[x].frac) + px(ty[y].lo, tx[x].hi) * tx[x].frac;
        const double bot = px(ty[y].hi, tx[x].lo) * (1 - tx[x].frac) + px(ty[y].hi, tx[x].hi) * tx[x].frac;
        out[(y * out_w + x) * 3 + c] = static_cast<float>(top * (1 - ty[y].frac) + bot * ty[y].frac);
      }
    }
  }
  return out;
}

/// Maps [0, 255] to [0, 1].
inline Image rescale(const Image& img) {
  return scale(img, 1.0f / 255.0f);
}

inline Image flip_horizontal(const Image& img) {
  check_image(img, "flip_horizontal");
  const std::size_t h = img.dim(0), w = img.dim(1);
  Image out(img.shape());
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) out[(y * w + x) * 3 + c] = img[(y * w + (w - 1 - x)) * 3 + c];
    }
  }
  return out;
}

inline Image flip_vertical(const Image& img) {
  check_image(img, "flip_vertical");
  const std::size_t h = img.dim(0), w = img.dim(1);
  Image out(img.shape());
  for (std::size_t y = 0; y < h; ++y) {
    std::copy_n(img.raw() + (h - 1 - y) * w * 3, w * 3, out.raw() + y * w * 3);
  }
  return out;
}

/// Rotates counter-clockwise (as displayed, y down) by `radians` about the
/// image center. Bilinear sampling; source pixels outside the image read as 0.
inline Image rotate_bilinear(const Image& img, double radians) {
  check_image(img, "rotate_bilinear");
  const std::size_t h = img.dim(0), w = img.dim(1);
  const double cy = (static_cast<double>(h) - 1) / 2, cx = (static_cast<double>(w) - 1) / 2;
  const double cs = std::cos(radians), sn = std::sin(radians);
  Image out(img.shape());
  auto px = [&](std::ptrdiff_t r, std::ptrdiff_t q, std::size_t c) -> double {
    if (r < 0 || q < 0 || r >= static_cast<std::ptrdiff_t>(h) || q >= static_cast<std::ptrdiff_t>(w)) return 0.0;
    return img[(static_cast<std::size_t>(r) * w + static_cast<std::size_t>(q)) * 3 + c];
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
      // inverse map: rotate the output offset clockwise to find the source
      const double sx = cx + dx * cs - dy * sn;
      const double sy = cy + dx * sn + dy * cs;
      const double fx = std::floor(sx), fy = std::floor(sy);
      const auto x0 = static_cast<std::ptrdiff_t>(fx), y0 = static_cast<std::ptrdiff_t>(fy);
      const double ax = sx - fx, ay = sy - fy;
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = px(y0, x0, c) * (1 - ax) + px(y0, x0 + 1, c) * ax;
        const double bot = px(y0 + 1, x0, c) * (1 - ax) + px(y0 + 1, x0 + 1, c) * ax;
        out[(y * w + x) * 3 + c] = static_cast<float>(top * (1 - ay) + bot * ay);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Augmentation

struct AugmentPolicy {
  double flip_horizontal_prob = 0.5;
  double flip_vertical_prob = 0.5;
  /// Rotation angle is drawn uniformly from +/- this fraction of a full turn.
  double rotation_max_turns = 0.1;

  static AugmentPolicy none() { return {0.0, 0.0, 0.0}; }

  void validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(flip_horizontal_prob) || !prob(flip_vertical_prob)) {
      throw ArgumentError("augment: flip probabilities must be in [0, 1]");
    }
    if (!(rotation_max_turns >= 0.0 && rotation_max_turns <= 0.5)) {
      throw ArgumentError("augment: rotation_max_turns must be in [0, 0.5]");
    }
  }
};

/// Random horizontal flip, vertical flip, then rotation. Always consumes
/// exactly three draws from `rng` so streams stay aligned across policies.
inline Image augment(const Image& img, const AugmentPolicy& policy, Rng& rng) {
  policy.validate();
  check_image(img, "augment");
  const bool hflip = rng.uniform() < policy.flip_horizontal_prob;
  const bool vflip = rng.uniform() < policy.flip_vertical_prob;
  const double turns = (2.0 * rng.uniform() - 1.0) * policy.rotation_max_turns;
  Image out = img;
  if (hflip) out = flip_horizontal(out);
  if (vflip) out = flip_vertical(out);
  if (turns != 0.0) {
    out = rotate_bilinear(out, turns * 2.0 * std::numbers::pi);
    for (auto& v : out.data()) v = std::clamp(v, 0.0f, 1.0f);
  }
  return out;
}

}  // namespace gournet
