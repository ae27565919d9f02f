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

#include "pba/bitio.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "pba/error.hpp"

namespace pba {

void ByteWriter::put_bytes(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void ByteWriter::put_tag(std::string_view tag) {
  for (char c : tag) buf_.push_back(static_cast<std::uint8_t>(c));
}

void ByteWriter::put_u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

std::span<const std::uint8_t> ByteReader::get_bytes(std::size_t n,
                                                    const char* field) {
  if (n > remaining())
    throw FormatError(what_ + ": truncated while reading " + field);
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::get_u8(const char* field) {
  return get_bytes(1, field)[0];
}

std::uint32_t ByteReader::get_u32(const char* field) {
  auto b = get_bytes(4, field);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t ByteReader::get_u64(const char* field) {
  auto b = get_bytes(8, field);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double ByteReader::get_f64(const char* field) {
  return std::bit_cast<double>(get_u64(field));
}

void BitWriter::put(std::uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) {
    if (nbits_ % 8 == 0) buf_.push_back(0);
    if ((value >> i) & 1u)
      buf_.back() |= static_cast<std::uint8_t>(0x80u >> (nbits_ % 8));
    ++nbits_;
  }
}

std::vector<std::uint8_t> BitWriter::finish() {
  nbits_ = 0;
  return std::move(buf_);
}

std::uint64_t BitReader::get(unsigned width) {
  if (pos_ + width > bytes_.size() * 8)
    throw FormatError("record truncated");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i, ++pos_) {
    const unsigned bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
    v = (v << 1) | bit;
  }
  return v;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return out;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace pba
