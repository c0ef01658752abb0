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

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>
#include <vector>

#include "gournet/error.hpp"
#include "gournet/model.hpp"
#include "gournet/tensor.hpp"

namespace gournet {

/// `.gnck` layout, little-endian throughout:
///
///     "GNCK"  u32 version  u32 tensor_count
///     per tensor: u16 name_len, name (UTF-8), u8 ndim, ndim x u32 dim, float32 x prod(dims)
///
/// Floats are stored as their IEEE-754 bit patterns, row-major.
inline constexpr std::array<char, 4> kCheckpointMagic{'G', 'N', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor<float> tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  const std::vector<char>& buffer() const noexcept { return buf_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::vector<char> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<char>& buf, std::string source) : buf_(buf), source_(std::move(source)) {}

  std::uint64_t le(int n, const std::string& what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string str(std::size_t n, const std::string& what) {
    need(n, what);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  const char* take(std::size_t n, const std::string& what) {
    need(n, what);
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool at_end() const noexcept { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n, const std::string& what) {
    if (buf_.size() - pos_ < n) throw CheckpointError(source_ + ": truncated file while reading " + what);
  }

  const std::vector<char>& buf_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<char> encode_checkpoint(const std::vector<NamedTensor>& tensors) {
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.name.size() > 0xFFFF) throw CheckpointError("tensor name too long: " + t.name.substr(0, 32) + "...");
    if (t.tensor.rank() > 0xFF) throw CheckpointError("too many dims in " + t.name);
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u8(static_cast<std::uint8_t>(t.tensor.rank()));
    for (std::size_t d : t.tensor.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (float v : t.tensor.data()) w.u32(std::bit_cast<std::uint32_t>(v));
  }
  return w.buffer();
}

inline std::vector<NamedTensor> decode_checkpoint(const std::vector<char>& bytes, const std::string& source) {
  detail::ByteReader r(bytes, source);
  const std::string magic = r.str(4, "magic");
  if (std::memcmp(magic.data(), kCheckpointMagic.data(), 4) != 0) throw CheckpointError(source + ": bad magic");
  const auto version = static_cast<std::uint32_t>(r.le(4, "version"));
  if (version != kCheckpointVersion) {
    throw CheckpointError(source + ": unsupported version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = static_cast<std::uint32_t>(r.le(4, "tensor count"));
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = static_cast<std::size_t>(r.le(2, "tensor name length"));
    std::string name = r.str(name_len, "tensor name");
    const auto ndim = static_cast<std::size_t>(r.le(1, "ndim of " + name));
    Shape shape(ndim);
    for (auto& d : shape) {
      d = static_cast<std::size_t>(r.le(4, "dims of " + name));
      if (d == 0) throw CheckpointError(source + ": zero dimension in " + name);
    }
    const std::size_t n = shape_size(shape);
    const char* raw = r.take(n * 4, "data of " + name);
    std::vector<float> data(n);
    for (std::size_t j = 0; j < n; ++j) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * j + b])) << (8 * b);
      data[j] = std::bit_cast<float>(bits);
    }
    out.push_back({std::move(name), Tensor<float>(std::move(shape), std::move(data))});
  }
  if (!r.at_end()) throw CheckpointError(source + ": trailing bytes after the last tensor");
  return out;
}

/// Writes to a sibling temp file, then renames over `path`.
inline void write_checkpoint(const std::vector<NamedTensor>& tensors, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(tensors);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::vector<char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes, path.string());
}

inline std::vector<NamedTensor> model_tensors(Model<float>& model) {
  std::vector<NamedTensor> out;
  for (const auto& p : model.params()) out.push_back({p.name, *p.value});
  return out;
}

inline void save_checkpoint(Model<float>& model, const std::filesystem::path& path) {
  write_checkpoint(model_tensors(model), path);
}

/// Copies checkpoint tensors into `model`. Names and shapes must match the
/// model's parameters exactly; nothing is modified unless all of them do.
inline void apply_checkpoint(Model<float>& model, const std::vector<NamedTensor>& tensors) {
  auto params = model.params();
  if (tensors.size() != params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, model expects " +
                          std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (tensors[i].name != params[i].name) {
      throw CheckpointError("tensor " + std::to_string(i) + " is '" + tensors[i].name + "', model expects '" +
                            params[i].name + "'");
    }
    if (tensors[i].tensor.shape() != params[i].value->shape()) {
      throw CheckpointError("shape mismatch for " + params[i].name + ": checkpoint " +
                            shape_str(tensors[i].tensor.shape()) + ", model " + shape_str(params[i].value->shape()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) *params[i].value = tensors[i].tensor;
}

inline void load_checkpoint(Model<float>& model, const std::filesystem::path& path) {
  apply_checkpoint(model, read_checkpoint(path));
}

}  // namespace gournet
