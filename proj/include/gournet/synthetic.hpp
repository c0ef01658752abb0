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
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "gournet/image.hpp"
#include "gournet/rng.hpp"

namespace gournet::synthetic {

namespace fs = std::filesystem;

/// Label strings of the eight leaf classes, lexicographic.
inline const std::array<std::string, 8>& leaf_class_names() {
  static const std::array<std::string, 8> names{"Anthracnose", "Bacterial Canker", "Cutting Weevil", "Die Back",
                                                "Gall Midge",  "Healthy",          "Powdery Mildew", "Sooty Mould"};
  return names;
}

inline std::string numbered(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", stem, i, ext);
  return buf;
}

/// Two linearly separable classes, "bright" and "dark": flat images around
/// intensity 190 or 60 with uniform per-pixel noise of +/-25.
inline void write_separable(const fs::path& root, std::size_t per_class, std::size_t size, std::uint64_t seed) {
  const std::array<std::pair<const char*, double>, 2> classes{{{"bright", 190.0}, {"dark", 60.0}}};
  for (std::size_t c = 0; c < classes.size(); ++c) {
    fs::create_directories(root / classes[c].first);
    for (std::size_t i = 0; i < per_class; ++i) {
      Rng rng(derive_seed({seed, c, i}));
      Image img({size, size, 3});
      const double tint = rng.uniform(-15.0, 15.0);
      for (auto& v : img.data()) v = static_cast<float>(std::round(classes[c].second + tint + rng.uniform(-25.0, 25.0)));
      save_ppm(img, root / classes[c].first / numbered("img", i, ".ppm"));
    }
  }
}

/// Procedural mango-leaf images for the eight classes. Each image is a
/// pointed-ellipse leaf at a random pose on a textured background, with a
/// class-specific symptom pattern painted on it. Image sizes vary between
/// 72 and 112 pixels per side so the resize path is exercised.
inline void write_leaves(const fs::path& root, std::size_t per_class, std::uint64_t seed) {
  const auto& names = leaf_class_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    fs::create_directories(root / names[c]);
    for (std::size_t i = 0; i < per_class; ++i) {
      Rng rng(derive_seed({seed, 0x4C454146ULL, c, i}));
      const auto h = static_cast<std::size_t>(72 + rng.below(41));
      const auto w = static_cast<std::size_t>(72 + rng.below(41));
      const double cx = w * rng.uniform(0.42, 0.58), cy = h * rng.uniform(0.42, 0.58);
      const double angle = rng.uniform(0.0, std::numbers::pi);
      const double span = std::min(h, w);
      const double a = span * rng.uniform(0.40, 0.47);  // half length
      const double b = a * rng.uniform(0.32, 0.42);     // half width
      const double cs = std::cos(angle), sn = std::sin(angle);
      const std::array<double, 3> bg{rng.uniform(150, 200), rng.uniform(130, 180), rng.uniform(100, 150)};
      const std::array<double, 3> leaf{rng.uniform(35, 70), rng.uniform(105, 150), rng.uniform(30, 60)};

      struct Spot {
        double u, v, r;
      };
      std::vector<Spot> spots;
      auto scatter = [&](std::size_t n, double rmin, double rmax) {
        for (std::size_t k = 0; k < n; ++k) {
          const double u = rng.uniform(-0.85, 0.85);
          const double lim = 1.0 - u * u;
          spots.push_back({u, rng.uniform(-0.8, 0.8) * lim, rng.uniform(rmin, rmax)});
        }
      };
      double cut = 2.0;           // Cutting Weevil: leaf removed beyond u > cut
      double dieback_from = 2.0;  // Die Back: browning for u > dieback_from
      switch (c) {
        case 0: scatter(6 + rng.below(7), 0.05, 0.11); break;   // Anthracnose
        case 1: scatter(10 + rng.below(8), 0.03, 0.06); break;  // Bacterial Canker
        case 2: cut = rng.uniform(-0.1, 0.35); break;
        case 3: dieback_from = rng.uniform(-0.2, 0.3); break;
        case 4: scatter(35 + rng.below(30), 0.012, 0.025); break;  // Gall Midge
        case 6: scatter(3 + rng.below(3), 0.18, 0.32); break;      // Powdery Mildew
        case 7: scatter(3 + rng.below(3), 0.25, 0.45); break;      // Sooty Mould
        default: break;
      }
      const bool flip_tip = rng.bernoulli(0.5);

      Image img({h, w, 3});
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const double dx = x - cx, dy = y - cy;
          double u = (dx * cs + dy * sn) / a;
          const double v = (-dx * sn + dy * cs) / b;
          if (flip_tip) u = -u;
          std::array<double, 3> px{bg[0] + 10 * std::sin(0.11 * x + 0.07 * y), bg[1] + 8 * std::sin(0.09 * y),
                                   bg[2] + 6 * std::cos(0.13 * x)};
          const double lim = 1.0 - u * u;
          const bool inside = std::abs(u) < 1.0 && std::abs(v) < lim && u < cut;
          if (inside) {
            const double shade = 0.85 + 0.25 * (1.0 - std::abs(v) / lim);
            for (int k = 0; k < 3; ++k) px[k] = leaf[k] * shade;
            if (std::abs(v) < 0.04) {  // midrib
              px[0] += 35, px[1] += 40, px[2] += 20;
            }
            if (u > dieback_from) {
              const double t = std::min(1.0, (u - dieback_from) * 3.0);
              px = {px[0] * (1 - t) + 120 * t, px[1] * (1 - t) + 75 * t, px[2] * (1 - t) + 35 * t};
            }
            for (const auto& s : spots) {
              const double du = (u - s.u) * a, dv = (v - s.v) * b;
              const double d = std::sqrt(du * du + dv * dv) / (s.r * a);
              if (d >= 1.6) continue;
              switch (c) {
                case 0:  // dark sunken spots
                  if (d < 1.0) px = {35, 25, 15};
                  break;
                case 1:  // dark centre with a yellow halo
                  if (d < 0.8) {
                    px = {50, 30, 20};
                  } else if (d < 1.6) {
                    px = {190, 180, 60};
                  }
                  break;
                case 4:  // raised reddish galls
                  if (d < 1.0) px = {130, 40, 35};
                  break;
                case 6: {  // powdery white film
                  const double t = std::max(0.0, 1.0 - d * d / 1.6) * 0.85;
                  for (int k = 0; k < 3; ++k) px[k] = px[k] * (1 - t) + 225 * t;
                  break;
                }
                case 7: {  // black sooty layer
                  const double t = std::max(0.0, 1.0 - d / 1.6) * 0.95;
                  for (int k = 0; k < 3; ++k) px[k] = px[k] * (1 - t) + 15 * t;
                  break;
                }
                default:
                  break;
              }
            }
          }
          for (int k = 0; k < 3; ++k) {
            img[(y * w + x) * 3 + k] = static_cast<float>(std::round(std::clamp(px[k] + rng.uniform(-8, 8), 0.0, 255.0)));
          }
        }
      }
      save_ppm(img, root / names[c] / numbered("leaf", i, ".ppm"));
    }
  }
}

}  // namespace gournet::synthetic
