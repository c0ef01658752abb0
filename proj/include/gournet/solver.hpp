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
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "gournet/config.hpp"
#include "gournet/error.hpp"
#include "gournet/layers.hpp"

namespace gournet {

/// The architecture family searched for a target parameter count:
///
///     conv first_filters KxK PAD relu, maxpool 2 2          (block 1, fixed width)
///     conv F_b KxK PAD relu, maxpool 2 2                    (blocks 2..B, F_b from filter_choices)
///     flatten, dense U relu, dense classes softmax
///
/// with B in [min_blocks, max_blocks], one padding shared by every conv, and
/// U in [min_units, max_units].
struct SearchFamily {
  Shape input{224, 224, 3};
  std::size_t first_filters = 32;
  std::size_t kernel = 3;
  std::size_t min_blocks = 2;
  std::size_t max_blocks = 6;
  std::vector<std::size_t> filter_choices{16, 32, 64, 128, 256};
  std::vector<Padding> paddings{Padding::kSame, Padding::kValid};
  std::size_t min_units = 1;
  std::size_t max_units = 4096;
  std::size_t classes = 8;
};

/// One point of the family. `filters` includes block 1.
struct FamilyMember {
  std::vector<std::size_t> filters;
  Padding padding = Padding::kValid;
  std::size_t units = 0;

  friend bool operator==(const FamilyMember&, const FamilyMember&) = default;
};

inline ModelConfig to_config(const FamilyMember& m, const SearchFamily& fam) {
  ModelConfig cfg;
  cfg.input = fam.input;
  for (std::size_t f : m.filters) {
    cfg.layers.push_back(LayerSpec::conv(f, fam.kernel, fam.kernel, m.padding, Activation::kReLU));
    cfg.layers.push_back(LayerSpec::maxpool(2, 2));
  }
  cfg.layers.push_back(LayerSpec::flatten());
  cfg.layers.push_back(LayerSpec::dense(m.units, Activation::kReLU));
  cfg.layers.push_back(LayerSpec::dense(fam.classes, Activation::kSoftmax));
  cfg.lines.assign(cfg.layers.size(), 0);
  return cfg;
}

struct SolveResult {
  std::vector<FamilyMember> matches;
  std::uint64_t candidates = 0;      // (filters, padding) prefixes visited
  std::uint64_t shape_invalid = 0;   // prefixes whose spatial dims collapse
  std::uint64_t unit_values = 0;     // (prefix, U) points covered
  std::string log;                   // completed-search record
};

/// Exhaustive search for every family member whose total parameter count
/// equals `target`.
///
/// For a conv prefix with parameter count P and flattened width D, the total
/// is P + classes + U * (D + 1 + classes), so each prefix admits at most one U
/// and the search over U is closed form. Results are ordered by block count,
/// then filter sequence (lexicographic), then padding order in the family.
inline SolveResult solve_config(std::uint64_t target, const SearchFamily& fam = {}) {
  if (fam.min_blocks < 1 || fam.min_blocks > fam.max_blocks) throw ArgumentError("solve_config: bad block range");
  if (fam.filter_choices.empty() || fam.paddings.empty()) throw ArgumentError("solve_config: empty choice set");
  if (fam.min_units < 1 || fam.min_units > fam.max_units) throw ArgumentError("solve_config: bad unit range");

  std::vector<std::size_t> choices = fam.filter_choices;
  std::sort(choices.begin(), choices.end());
  choices.erase(std::unique(choices.begin(), choices.end()), choices.end());

  SolveResult res;
  std::ostringstream log;
  log << "# parameter-count search\n";
  log << "target " << target << "\n";
  log << "family input " << fam.input[0] << "x" << fam.input[1] << "x" << fam.input[2] << ", block 1 conv "
      << fam.first_filters << "@" << fam.kernel << "x" << fam.kernel << ", blocks " << fam.min_blocks << ".."
      << fam.max_blocks << ", filters {";
  for (std::size_t i = 0; i < choices.size(); ++i) log << (i ? "," : "") << choices[i];
  log << "}, paddings {";
  for (std::size_t i = 0; i < fam.paddings.size(); ++i) log << (i ? "," : "") << to_string(fam.paddings[i]);
  log << "}, units " << fam.min_units << ".." << fam.max_units << ", head " << fam.classes << "\n";

  for (std::size_t blocks = fam.min_blocks; blocks <= fam.max_blocks; ++blocks) {
    std::vector<std::size_t> odo(blocks - 1, 0);
    std::uint64_t level_candidates = 0, level_invalid = 0, level_matches = 0;
    for (;;) {
      std::vector<std::size_t> filters{fam.first_filters};
      for (std::size_t d : odo) filters.push_back(choices[d]);
      for (Padding pad : fam.paddings) {
        ++level_candidates;
        // Conv prefix parameters and flattened width.
        Shape shape = fam.input;
        std::uint64_t conv_params = 0;
        bool valid = true;
        for (std::size_t f : filters) {
          const LayerSpec conv = LayerSpec::conv(f, fam.kernel, fam.kernel, pad);
          const LayerSpec pool = LayerSpec::maxpool(2, 2);
          if (pad == Padding::kValid && (shape[0] < fam.kernel || shape[1] < fam.kernel)) {
            valid = false;
            break;
          }
          conv_params += param_count(conv, shape).total;
          shape = infer_output_shape(conv, shape);
          if (shape[0] < 2 || shape[1] < 2) {
            valid = false;
            break;
          }
          shape = infer_output_shape(pool, shape);
        }
        if (!valid) {
          ++level_invalid;
          continue;
        }
        res.unit_values += fam.max_units - fam.min_units + 1;
        const std::uint64_t flat = shape_size(shape);
        const std::uint64_t fixed = conv_params + fam.classes;
        const std::uint64_t per_unit = flat + 1 + fam.classes;
        if (target <= fixed || (target - fixed) % per_unit != 0) continue;
        const std::uint64_t units = (target - fixed) / per_unit;
        if (units < fam.min_units || units > fam.max_units) continue;
        res.matches.push_back({filters, pad, static_cast<std::size_t>(units)});
        ++level_matches;
      }
      // advance odometer (last digit fastest => lexicographic order)
      std::size_t i = odo.size();
      while (i > 0 && ++odo[i - 1] == choices.size()) odo[--i] = 0;
      if (i == 0) break;
    }
    res.candidates += level_candidates;
    res.shape_invalid += level_invalid;
    log << "blocks " << blocks << ": " << level_candidates << " prefixes, " << level_invalid
        << " shape-invalid, " << level_matches << " matches\n";
  }

  for (const auto& m : res.matches) {
    log << "match:";
    for (std::size_t f : m.filters) log << ' ' << f;
    log << " pad " << to_string(m.padding) << " units " << m.units << "\n";
  }
  log << "search complete: " << res.candidates << " prefixes (" << res.shape_invalid << " shape-invalid), "
      << res.unit_values << " (prefix, units) points, " << res.matches.size() << " matches\n";
  res.log = log.str();
  return res;
}

}  // namespace gournet
