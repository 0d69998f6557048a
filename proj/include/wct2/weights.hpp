/*
 * Copyright 2026 The WCT2 Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Weight container, version 1. All integers little-endian.
//
//   "WCT2WTS\0"                       8-byte magic
//   u32 version (= 1)
//   u32 tensor count
//   per tensor, names in lexicographic byte order:
//     u16 name length, UTF-8 name bytes
//     u8  dtype (0 = f32)
//     u8  ndim
//     u32 dims[ndim]
//     f32 payload[prod(dims)]
//   u32 CRC-32 (IEEE, as zlib.crc32) of every byte after the magic

#include <zlib.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wct2 {

class WeightFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadMagicError : public WeightFormatError {
 public:
  using WeightFormatError::WeightFormatError;
};
class VersionMismatchError : public WeightFormatError {
 public:
  using WeightFormatError::WeightFormatError;
};
class ChecksumError : public WeightFormatError {
 public:
  using WeightFormatError::WeightFormatError;
};
class TruncatedError : public WeightFormatError {
 public:
  using WeightFormatError::WeightFormatError;
};

/// A required tensor is absent or has the wrong shape.
class WeightLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           [](std::size_t a, std::uint32_t d) { return a * d; });
  }

  bool operator==(const Tensor& o) const {
    if (dims != o.dims || values.size() != o.values.size()) return false;
    // Bit-level comparison so NaN payloads and signed zeros round-trip too.
    return std::memcmp(values.data(), o.values.data(), values.size() * sizeof(float)) == 0;
  }
};

inline std::string dims_string(const std::vector<std::uint32_t>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
  return s + "]";
}

/// Name-ordered tensor map.
class WeightStore {
 public:
  static constexpr std::array<char, 8> kMagic{'W', 'C', 'T', '2', 'W', 'T', 'S', '\0'};
  static constexpr std::uint32_t kVersion = 1;

  void insert(std::string name, Tensor t) {
    if (t.element_count() != t.values.size())
      throw WeightFormatError("tensor '" + name + "': dims " + dims_string(t.dims) +
                              " do not match " + std::to_string(t.values.size()) + " values");
    if (name.size() > 0xFFFF) throw WeightFormatError("tensor name longer than 65535 bytes");
    if (t.dims.size() > 0xFF) throw WeightFormatError("tensor '" + name + "' has too many dims");
    tensors_[std::move(name)] = std::move(t);
  }

  bool contains(const std::string& name) const { return tensors_.contains(name); }
  const Tensor* find(const std::string& name) const {
    auto it = tensors_.find(name);
    return it == tensors_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }
  std::size_t size() const { return tensors_.size(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : tensors_) n += t.values.size();
    return n;
  }

  bool operator==(const WeightStore&) const = default;

  std::vector<std::uint8_t> serialize() const;
  static WeightStore parse(std::span<const std::uint8_t> bytes);

 private:
  std::map<std::string, Tensor> tensors_;
};

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : b_(b) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    auto s = take(2);
    return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
  }
  std::uint32_t u32() {
    auto s = take(4);
    return static_cast<std::uint32_t>(s[0]) | (static_cast<std::uint32_t>(s[1]) << 8) |
           (static_cast<std::uint32_t>(s[2]) << 16) | (static_cast<std::uint32_t>(s[3]) << 24);
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > b_.size() - pos_)
      throw TruncatedError("weight container truncated at byte " + std::to_string(pos_));
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return b_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for large containers.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = crc32(crc, bytes.data() + off, n);
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

inline std::vector<std::uint8_t> WeightStore::serialize() const {
  detail::ByteWriter w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(tensors_.size()));
  for (const auto& [name, t] : tensors_) {
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(name.data()), name.size()});
    w.u8(0);
    w.u8(static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) w.u32(d);
    for (float v : t.values) w.u32(std::bit_cast<std::uint32_t>(v));
  }
  auto& buf = w.buffer();
  const std::uint32_t crc = detail::crc32_of(std::span(buf).subspan(kMagic.size()));
  w.u32(crc);
  return std::move(buf);
}

inline WeightStore WeightStore::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    if (bytes.size() < kMagic.size() &&
        std::memcmp(bytes.data(), kMagic.data(), bytes.size()) == 0)
      throw TruncatedError("weight container truncated inside the magic");
    throw BadMagicError("not a weight container (bad magic)");
  }
  detail::ByteReader r(bytes.subspan(kMagic.size()));
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw VersionMismatchError("unsupported weight container version " + std::to_string(version) +
                               " (expected " + std::to_string(kVersion) + ")");
  const std::uint32_t count = r.u32();
  WeightStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16();
    auto name_bytes = r.take(name_len);
    std::string name(name_bytes.begin(), name_bytes.end());
    const std::uint8_t dtype = r.u8();
    if (dtype != 0)
      throw WeightFormatError("tensor '" + name + "': unknown dtype tag " + std::to_string(dtype));
    const std::uint8_t ndim = r.u8();
    Tensor t;
    for (std::uint8_t d = 0; d < ndim; ++d) t.dims.push_back(r.u32());
    const std::size_t n = t.element_count();
    if (n > r.remaining() / 4)
      throw TruncatedError("tensor '" + name + "': payload truncated");
    auto payload = r.take(4 * n);
    t.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto* p = payload.data() + 4 * k;
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                 (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) |
                                 (static_cast<std::uint32_t>(p[3]) << 24);
      t.values[k] = std::bit_cast<float>(bits);
    }
    if (store.contains(name)) throw WeightFormatError("duplicate tensor name '" + name + "'");
    store.tensors_.emplace(std::move(name), std::move(t));
  }
  const std::size_t body_end = r.position();
  const std::uint32_t stored_crc = r.u32();
  if (r.remaining() != 0)
    throw WeightFormatError("trailing bytes after weight container checksum");
  const std::uint32_t actual =
      detail::crc32_of(bytes.subspan(kMagic.size(), body_end));
  if (actual != stored_crc) throw ChecksumError("weight container checksum mismatch");
  return store;
}

inline WeightStore load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightFormatError("cannot open weight file '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return WeightStore::parse(bytes);
}

inline void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  const auto bytes = store.serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WeightFormatError("cannot write weight file '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WeightFormatError("failed writing weight file '" + path.string() + "'");
}

}  // namespace wct2
