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

// Dataset loading and empirical second-order statistics.
//
// Two on-disk formats are supported:
//   * CSV: one sample per line, comma-separated decimal floats, no header.
//   * PBADATA: "PBADATA\0", u32 n, u32 d (little-endian), then n*d
//     little-endian f64 values in row-major order.

#ifndef PBA_DATASTORE_HPP_
#define PBA_DATASTORE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pba/matrix.hpp"

namespace pba {

// n x d samples, one per row, all finite. An empty dataset (n == 0) is
// representable because encode/decode must round-trip empty batches, but
// every statistics routine rejects it.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Matrix samples);

  std::size_t n() const { return samples_.rows(); }
  std::size_t d() const { return samples_.cols(); }
  const Matrix& samples() const { return samples_; }
  std::span<const double> sample(std::size_t i) const { return samples_.row(i); }

  // Rows [begin, end) as a new dataset.
  Dataset slice(std::size_t begin, std::size_t end) const;

  bool operator==(const Dataset&) const = default;

 private:
  Matrix samples_;
};

struct CovarianceModel {
  std::vector<double> mean;
  Matrix K;         // (1/n) sum (x - mean)(x - mean)^T
  double P = 0.0;   // trace(K) / d: centered second moment per dimension

  std::size_t d() const { return mean.size(); }
};

Dataset load_csv(const std::string& path);
Dataset parse_csv(const std::string& text);
void write_csv(const Dataset& data, const std::string& path);

Dataset load_f64bin(const std::string& path);
Dataset decode_f64bin(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_f64bin(const Dataset& data);
void write_f64bin(const Dataset& data, const std::string& path);

// Picks the decoder from the file's leading bytes: PBADATA magic selects the
// binary format, anything else is parsed as CSV.
Dataset load_dataset(const std::string& path);

CovarianceModel fit_stats(const Dataset& data);

}  // namespace pba

#endif  // PBA_DATASTORE_HPP_
