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

// Fixed-rate transform codec built on an eigen-aligned linear encoder.
//
// Encoding sample x: latent_i = s_i * u_i^T (x - mean) for every component
// with bits_i > 0, quantized with the clamped dithered quantizer and packed
// MSB-first into a record of ceil(total_bits / 8) bytes. Decoding maps each
// index back to its codebook point y_i and returns mean + sum t_i y_i u_i,
// where t_i = sigma_i^2 s_i / (v_i + sigma2) is the linear least-squares
// decoder for additive quantization noise of variance sigma2.
//
// File formats (all scalars little-endian):
//   PBAM model:     "PBAM" u32 version=1, u32 d, f64 a, f64 sigma2, u64 seed,
//                   f64 mean[d], f64 U[d*d] (column-major), f64 s[d],
//                   f64 v[d], f64 t[d], u8 bits[d]
//   PBAC container: "PBAC" u32 version=1, u8 model_sha256[32], u64 n,
//                   u32 total_bits, then n records of equal length

#ifndef PBA_CODEC_HPP_
#define PBA_CODEC_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pba/allocator.hpp"
#include "pba/datastore.hpp"
#include "pba/matrix.hpp"
#include "pba/quantizer.hpp"
#include "pba/spectral.hpp"

namespace pba {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kContainerHeaderSize = 4 + 4 + 32 + 8 + 4;

struct PbaModel {
  std::vector<double> mean;
  Matrix U;                   // column i = eigenvector u_i
  std::vector<double> s;      // encoder gains
  std::vector<double> v;      // latent variances, re-estimated on training data
  std::vector<double> t;      // decoder coefficients
  double a = kDefaultA;
  double sigma2 = kDefaultSigma2;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> bits;

  std::size_t d() const { return mean.size(); }
  std::uint32_t total_bits() const;
  std::size_t record_bytes() const { return (total_bits() + 7) / 8; }
  QuantSpec quant_spec(std::size_t i) const;

  bool operator==(const PbaModel&) const = default;
};

// Everything produced while training, for callers that want to compare the
// analytic prediction against realized behaviour.
struct FitResult {
  PbaModel model;
  Allocation allocation;  // analytic gains and predicted true_mse
  Spectrum spectrum;
  CovarianceModel stats;
};

// Caches the statistics and eigen-decomposition of a training set so that
// many operating points can be fitted without refactoring the covariance.
class Trainer {
 public:
  // Requires n >= 2.
  explicit Trainer(const Dataset& train);

  const CovarianceModel& stats() const { return stats_; }
  const Spectrum& spectrum() const { return spectrum_; }

  // cfg.lambda is the reduced multiplier; see AllocatorConfig::reduced_lambda.
  FitResult fit(const AllocatorConfig& cfg, std::uint64_t seed) const;

  FitResult fit_pca(std::size_t k, int gain_bits, double a, double sigma2,
                    std::uint64_t seed) const;

  // Bisects lambda (log scale) for the smallest multiplier whose realized
  // total_bits / d does not exceed target_bits_per_dim.
  FitResult fit_target_bits(double target_bits_per_dim, double a, double sigma2,
                            std::uint64_t seed) const;

  // Wraps any allocation (e.g. a hand-built one) into a model.
  PbaModel build_model(const Allocation& alloc, double a, double sigma2,
                       std::uint64_t seed) const;

 private:
  CovarianceModel stats_;
  Spectrum spectrum_;
};

FitResult fit(const Dataset& data, const AllocatorConfig& cfg, std::uint64_t seed);

// kPerComponent reuses sample index 0 for every sample's dither, i.e. one
// dither value per component for the whole dataset.
enum class DitherMode { kPerSample, kPerComponent };

std::vector<std::uint8_t> encode_sample(const PbaModel& model,
                                        std::uint64_t sample_index,
                                        std::span<const double> x,
                                        DitherMode mode = DitherMode::kPerSample);

std::vector<double> decode_sample(const PbaModel& model, std::uint64_t sample_index,
                                  std::span<const std::uint8_t> record,
                                  DitherMode mode = DitherMode::kPerSample);

// Codebook values y_i for one record (0 for uncoded components).
std::vector<double> decode_latents(const PbaModel& model, std::uint64_t sample_index,
                                   std::span<const std::uint8_t> record,
                                   DitherMode mode = DitherMode::kPerSample);

std::vector<std::uint8_t> serialize_model(const PbaModel& model);
PbaModel deserialize_model(std::span<const std::uint8_t> bytes);
void write_model(const PbaModel& model, const std::string& path);
PbaModel read_model(const std::string& path);

using Sha256 = std::array<std::uint8_t, 32>;
Sha256 sha256(std::span<const std::uint8_t> bytes);
Sha256 model_hash(const PbaModel& model);

struct Container {
  Sha256 model_hash{};
  std::uint64_t n = 0;
  std::uint32_t total_bits = 0;
  std::vector<std::uint8_t> payload;

  std::size_t record_bytes() const { return (total_bits + 7) / 8; }
  std::size_t record_offset(std::uint64_t j) const {
    return kContainerHeaderSize + static_cast<std::size_t>(j) * record_bytes();
  }
};

Container make_container(const PbaModel& model,
                         std::span<const std::vector<std::uint8_t>> records);

std::vector<std::uint8_t> serialize_container(const Container& c);
Container deserialize_container(std::span<const std::uint8_t> bytes);
void write_container(const Container& c, const std::string& path);
Container read_container(const std::string& path);

// Record j of an in-memory container. Throws for j >= n.
std::span<const std::uint8_t> random_access(const Container& c, std::uint64_t j);

// Reads only the header and record j from disk.
std::vector<std::uint8_t> read_record_at(const std::string& path, std::uint64_t j);

// Throws HashMismatch when the container was not produced with `model`.
void check_model(const Container& c, const PbaModel& model);

std::vector<std::vector<std::uint8_t>> encode_batch(
    const PbaModel& model, const Dataset& data,
    DitherMode mode = DitherMode::kPerSample);

// Verifies the model hash, then decodes every record.
Dataset decode_container(const PbaModel& model, const Container& c,
                         DitherMode mode = DitherMode::kPerSample);

}  // namespace pba

#endif  // PBA_CODEC_HPP_
