// Copyright 2026 The PBA Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PBA_BITIO_HPP_
#define PBA_BITIO_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pba {

// Little-endian scalar serialization into a growing byte buffer.
class ByteWriter {
 public:
  void put_bytes(std::span<const std::uint8_t> bytes);
  void put_tag(std::string_view tag);
  void put_u8(std::uint8_t v) { buf_.push_back(v); }
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f64(double v);

  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked little-endian reader. Running past the end throws
// FormatError naming `what_` and the requested field.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  std::span<const std::uint8_t> get_bytes(std::size_t n, const char* field);
  std::uint8_t get_u8(const char* field);
  std::uint32_t get_u32(const char* field);
  std::uint64_t get_u64(const char* field);
  double get_f64(const char* field);

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

// MSB-first bit packer: each value is written big-endian in exactly `width`
// bits, and the final partial byte is zero-padded.
class BitWriter {
 public:
  void put(std::uint64_t value, unsigned width);
  std::vector<std::uint8_t> finish();
  std::size_t bit_count() const { return nbits_; }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t nbits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint64_t get(unsigned width);

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace pba

#endif  // PBA_BITIO_HPP_
