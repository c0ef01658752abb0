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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "gournet/error.hpp"
#include "gournet/image.hpp"
#include "gournet/rng.hpp"

namespace gournet {

namespace fs = std::filesystem;

/// One labeled image; `path` is relative to the dataset root, '/'-separated.
struct Sample {
  std::string path;
  int label = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct ScanReport {
  std::size_t accepted = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

struct Dataset {
  fs::path root;
  std::vector<std::string> class_names;
  std::vector<Sample> samples;  // sorted by (class, filename)
  ScanReport report;
};

/// One class per immediate subdirectory of `root`, class names and file names
/// both sorted by byte value. Files that fail to decode are skipped with a
/// warning. Class directories left without any decodable image are dropped.
inline Dataset scan_dataset(const fs::path& root, bool verify_decode = true) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw DataError("dataset root is not a directory: " + root.string());
  std::vector<std::string> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) dirs.push_back(e.path().filename().string());
  }
  std::sort(dirs.begin(), dirs.end());

  Dataset ds;
  ds.root = root;
  for (const auto& dir : dirs) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(root / dir)) {
      if (e.is_regular_file()) files.push_back(e.path().filename().string());
    }
    std::sort(files.begin(), files.end());
    std::vector<Sample> kept;
    for (const auto& f : files) {
      const std::string rel = dir + "/" + f;
      if (verify_decode) {
        try {
          (void)load_image(root / dir / f);
        } catch (const DataError& e) {
          ds.report.warnings.push_back(std::string("skipped: ") + e.what());
          ++ds.report.skipped;
          continue;
        }
      }
      kept.push_back({rel, static_cast<int>(ds.class_names.size())});
    }
    if (kept.empty()) continue;
    ds.class_names.push_back(dir);
    ds.samples.insert(ds.samples.end(), kept.begin(), kept.end());
  }
  ds.report.accepted = ds.samples.size();
  if (ds.samples.empty()) throw DataError("no decodable images under " + root.string());
  return ds;
}

enum class Split : std::uint8_t { kTrain, kVal, kTest };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    default:
      return "test";
  }
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ArgumentError("unknown split '" + s + "' (expected train, val or test)");
}

/// Per-sample split assignment, parallel to `samples`.
struct SplitManifest {
  std::vector<std::string> class_names;
  std::vector<Sample> samples;
  std::vector<Split> assignment;
  std::uint64_t seed = 0;

  /// counts[class][split]
  std::vector<std::array<std::size_t, 3>> counts() const {
    std::vector<std::array<std::size_t, 3>> c(class_names.size(), {0, 0, 0});
    for (std::size_t i = 0; i < samples.size(); ++i) {
      ++c[static_cast<std::size_t>(samples[i].label)][static_cast<std::size_t>(assignment[i])];
    }
    return c;
  }

  /// Indices into `samples` that belong to `split`, in manifest order.
  std::vector<std::size_t> members(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i] == split) out.push_back(i);
    }
    return out;
  }
};

/// Stratified split: within each class, shuffle with a per-class stream of
/// `seed`, send the first floor(n/10) to test, the next floor(n/10) to
/// validation, and the remainder to training.
inline SplitManifest stratified_split(const Dataset& ds, std::uint64_t seed) {
  SplitManifest m{ds.class_names, ds.samples, std::vector<Split>(ds.samples.size(), Split::kTrain), seed};
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      if (ds.samples[i].label == static_cast<int>(c)) idx.push_back(i);
    }
    Rng rng(derive_seed({seed, 0x53504C4954ULL, c}));
    rng.shuffle(idx.begin(), idx.end());
    const std::size_t tenth = idx.size() / 10;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      m.assignment[idx[k]] = k < tenth ? Split::kTest : (k < 2 * tenth ? Split::kVal : Split::kTrain);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Manifest CSV: header `path,class,split`, one row per sample in (class,
// filename) order, LF endings. Fields containing a comma, quote or newline
// are quoted RFC 4180 style.

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_row(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw DataError("manifest line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

}  // namespace detail

inline std::string manifest_text(const SplitManifest& m) {
  std::string out = "path,class,split\n";
  for (std::size_t i = 0; i < m.samples.size(); ++i) {
    out += detail::csv_field(m.samples[i].path) + "," +
           detail::csv_field(m.class_names[static_cast<std::size_t>(m.samples[i].label)]) + "," +
           to_string(m.assignment[i]) + "\n";
  }
  return out;
}

inline void write_manifest(const SplitManifest& m, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << manifest_text(m);
  if (!out) throw DataError("short write to " + path.string());
}

/// Parses manifest text. Class indices follow the lexicographic order of the
/// class names present.
inline SplitManifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::array<std::string, 3>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "path,class,split") throw DataError("manifest: expected header 'path,class,split'");
      continue;
    }
    if (line.empty()) continue;
    auto f = detail::csv_row(line, line_no);
    if (f.size() != 3) throw DataError("manifest line " + std::to_string(line_no) + ": expected 3 fields");
    rows.push_back({f[0], f[1], f[2]});
  }
  if (line_no == 0) throw DataError("manifest: empty file");
  SplitManifest m;
  std::set<std::string> names;
  for (const auto& r : rows) names.insert(r[1]);
  m.class_names.assign(names.begin(), names.end());
  for (const auto& r : rows) {
    const auto it = std::lower_bound(m.class_names.begin(), m.class_names.end(), r[1]);
    m.samples.push_back({r[0], static_cast<int>(it - m.class_names.begin())});
    try {
      m.assignment.push_back(parse_split(r[2]));
    } catch (const ArgumentError& e) {
      throw DataError(std::string("manifest: ") + e.what());
    }
  }
  return m;
}

inline SplitManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

// ---------------------------------------------------------------------------
// Batching

/// Splits `members` into batches of `batch_size` (the last one may be short).
/// With `shuffle`, the order is a permutation drawn from a stream derived
/// from (seed, epoch), so any epoch can be replayed on its own.
inline std::vector<std::vector<std::size_t>> plan_batches(const std::vector<std::size_t>& members,
                                                          std::size_t batch_size, bool shuffle, std::uint64_t seed,
                                                          std::uint64_t epoch) {
  if (batch_size == 0) throw ArgumentError("batch_size must be >= 1");
  std::vector<std::size_t> order = members;
  if (shuffle) {
    Rng rng(derive_seed({seed, 0x4550344348ULL, epoch}));
    rng.shuffle(order.begin(), order.end());
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(i + batch_size, order.size())));
  }
  return out;
}

/// Decodes, resizes and rescales dataset images on demand, caching results.
/// Every decoded path is recorded in access_log().
class ImageSource {
 public:
  ImageSource(fs::path root, std::size_t height, std::size_t width)
      : root_(std::move(root)), height_(height), width_(width) {}

  const Image& get(const std::string& rel_path) {
    if (auto it = cache_.find(rel_path); it != cache_.end()) return it->second;
    log_.insert(rel_path);
    Image img = rescale(resize_bilinear(load_image(root_ / rel_path), height_, width_));
    return cache_.emplace(rel_path, std::move(img)).first->second;
  }

  const std::set<std::string>& access_log() const noexcept { return log_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  const fs::path& root() const noexcept { return root_; }

 private:
  fs::path root_;
  std::size_t height_, width_;
  std::unordered_map<std::string, Image> cache_;
  std::set<std::string> log_;
};

}  // namespace gournet
