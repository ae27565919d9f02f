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

#include "pba/datastore.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "pba/bitio.hpp"
#include "pba/error.hpp"

namespace pba {
namespace {

constexpr char kDataMagic[8] = {'P', 'B', 'A', 'D', 'A', 'T', 'A', '\0'};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset::Dataset(Matrix samples) : samples_(std::move(samples)) {
  if (samples_.cols() == 0 && samples_.rows() > 0)
    throw InvalidArgument("dataset dimension must be >= 1");
  for (std::size_t r = 0; r < samples_.rows(); ++r)
    for (std::size_t c = 0; c < samples_.cols(); ++c)
      if (!std::isfinite(samples_(r, c)))
        throw InvalidArgument("non-finite value at row " + std::to_string(r + 1) +
                              " column " + std::to_string(c + 1));
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > n()) throw InvalidArgument("slice out of range");
  Matrix m(end - begin, d());
  for (std::size_t r = begin; r < end; ++r) {
    auto src = samples_.row(r);
    std::copy(src.begin(), src.end(), m.row(r - begin).begin());
  }
  return Dataset(std::move(m));
}

Dataset parse_csv(const std::string& text) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    std::size_t count = 0;
    while (true) {
      const std::size_t comma = sv.find(',');
      std::string_view cell = trim(sv.substr(0, comma));
      double v = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
        throw FormatError("unparseable cell at line " + std::to_string(line_no) +
                          " column " + std::to_string(count + 1));
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      sv.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError("ragged row at line " + std::to_string(line_no) +
                        ": expected " + std::to_string(cols) + " columns, got " +
                        std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw FormatError("empty dataset (n=0)");
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data().begin());
  return Dataset(std::move(m));
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  char buf[64];
  for (std::size_t r = 0; r < data.n(); ++r) {
    auto row = data.sample(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      auto res = std::to_chars(buf, buf + sizeof(buf), row[c]);
      if (c) out.put(',');
      out.write(buf, res.ptr - buf);
    }
    out.put('\n');
  }
  if (!out) throw IoError("write failed: " + path);
}

Dataset decode_f64bin(std::span<const std::uint8_t> bytes) {
  ByteReader rd(bytes, "PBADATA");
  auto magic = rd.get_bytes(8, "magic");
  if (std::memcmp(magic.data(), kDataMagic, 8) != 0)
    throw FormatError("PBADATA: bad magic");
  const std::uint32_t n = rd.get_u32("n");
  const std::uint32_t d = rd.get_u32("d");
  const std::uint64_t need = std::uint64_t{n} * d * 8;
  if (rd.remaining() < need)
    throw FormatError("PBADATA: truncated payload (expected " +
                      std::to_string(need) + " bytes, have " +
                      std::to_string(rd.remaining()) + ")");
  if (n > 0 && d == 0) throw FormatError("PBADATA: d=0");
  Matrix m(n, d);
  for (double& x : m.data()) x = rd.get_f64("sample");
  return Dataset(std::move(m));
}

Dataset load_f64bin(const std::string& path) {
  return decode_f64bin(read_file(path));
}

std::vector<std::uint8_t> encode_f64bin(const Dataset& data) {
  if (data.n() > std::numeric_limits<std::uint32_t>::max() ||
      data.d() > std::numeric_limits<std::uint32_t>::max())
    throw InvalidArgument("dataset too large for PBADATA");
  ByteWriter w;
  w.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(kDataMagic), 8));
  w.put_u32(static_cast<std::uint32_t>(data.n()));
  w.put_u32(static_cast<std::uint32_t>(data.d()));
  for (double x : data.samples().data()) w.put_f64(x);
  return w.take();
}

void write_f64bin(const Dataset& data, const std::string& path) {
  write_file(path, encode_f64bin(data));
}

Dataset load_dataset(const std::string& path) {
  auto bytes = read_file(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kDataMagic, 8) == 0)
    return decode_f64bin(bytes);
  return parse_csv(std::string(bytes.begin(), bytes.end()));
}

CovarianceModel fit_stats(const Dataset& data) {
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  if (n == 0) throw InvalidArgument("fit_stats: empty dataset");
  CovarianceModel cm;
  cm.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto x = data.sample(r);
    for (std::size_t c = 0; c < d; ++c) cm.mean[c] += x[c];
  }
  for (double& m : cm.mean) m /= static_cast<double>(n);

  cm.K = Matrix(d, d);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    auto x = data.sample(r);
    for (std::size_t c = 0; c < d; ++c) centered[c] = x[c] - cm.mean[c];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centered[i];
      auto krow = cm.K.row(i);
      for (std::size_t j = i; j < d; ++j) krow[j] += ci * centered[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cm.K(i, j) *= inv_n;
      cm.K(j, i) = cm.K(i, j);
    }
  }
  cm.P = trace(cm.K) / static_cast<double>(d);
  return cm;
}

}  // namespace pba
