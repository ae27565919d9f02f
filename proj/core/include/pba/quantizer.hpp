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

// Clamped dithered scalar quantization.
//
// For a latent with variance v the codebook is the Gamma points
// { i + u : i integer, i + u in (-Gamma/2, Gamma/2] },
// Gamma = 2^floor(0.5 * log2(4 a^2 v + 1)), where u in [-1/2, 1/2) is a
// dither shared by encoder and decoder through a seeded hash. Indices are
// the ascending rank of the point inside the codebook.

#ifndef PBA_QUANTIZER_HPP_
#define PBA_QUANTIZER_HPP_

#include <cstdint>

namespace pba {

struct QuantSpec {
  double a = 0.0;
  double v = 0.0;
  std::uint64_t gamma_pts = 1;
  unsigned bits = 0;
};

// Exact floor(0.5 * log2(4 a^2 v + 1)): the largest k with 4^k <= 4a^2 v + 1.
// Capped at 62 so every index fits a uint64 with room to spare.
unsigned gamma_bits(double a, double v);

QuantSpec make_spec(double a, double v);

struct DitherKey {
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
  std::uint32_t component_index = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic dither in [-1/2, 1/2) with 53 bits of resolution.
double dither(const DitherKey& key);

// Nearest codebook point to x, clamped to the end points; exact ties go to
// the lower rank. Throws InvalidArgument for NaN x or u outside [-1/2, 1/2].
std::uint64_t q_cd(const QuantSpec& spec, double u, double x);

// Value of the index-th codebook point. Throws for index >= Gamma.
double q_cd_prime(const QuantSpec& spec, double u, std::uint64_t index);

}  // namespace pba

#endif  // PBA_QUANTIZER_HPP_
