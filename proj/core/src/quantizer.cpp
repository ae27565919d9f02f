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

#include "pba/quantizer.hpp"

#include <cmath>
#include <string>

#include "pba/error.hpp"

namespace pba {
namespace {

constexpr unsigned kMaxBits = 62;

// Smallest integer i whose point i + u lies above -Gamma/2, derived with
// integer case analysis so it never depends on rounding of -Gamma/2 - u.
std::int64_t lowest_offset(std::uint64_t gamma_pts, double u) {
  if (gamma_pts == 1) return u == -0.5 ? 1 : 0;
  const std::int64_t half = static_cast<std::int64_t>(gamma_pts / 2);
  return u > 0.0 ? -half : -half + 1;
}

void check_dither(double u) {
  if (!(u >= -0.5 && u <= 0.5))
    throw InvalidArgument("dither must lie in [-1/2, 1/2]");
}

}  // namespace

unsigned gamma_bits(double a, double v) {
  if (!(a > 0.0) || !(v >= 0.0))
    throw InvalidArgument("make_spec: need a > 0 and v >= 0");
  const double x = 4.0 * a * a * v + 1.0;
  if (!std::isfinite(x)) throw InvalidArgument("make_spec: 4a^2 v + 1 not finite");
  unsigned k = 0;
  while (k < kMaxBits && std::ldexp(1.0, 2 * static_cast<int>(k + 1)) <= x) ++k;
  return k;
}

QuantSpec make_spec(double a, double v) {
  QuantSpec spec;
  spec.a = a;
  spec.v = v;
  spec.bits = gamma_bits(a, v);
  spec.gamma_pts = std::uint64_t{1} << spec.bits;
  return spec;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double dither(const DitherKey& key) {
  const std::uint64_t z =
      splitmix64(key.seed ^ (key.sample_index * 0x9E3779B97F4A7C15ull) ^
                 (std::uint64_t{key.component_index} + 0xD1B54A32D192ED03ull));
  return static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5;
}

std::uint64_t q_cd(const QuantSpec& spec, double u, double x) {
  check_dither(u);
  if (std::isnan(x)) throw InvalidArgument("q_cd: NaN input");
  const double lowest = static_cast<double>(lowest_offset(spec.gamma_pts, u)) + u;
  const double t = x - lowest;
  const double last = static_cast<double>(spec.gamma_pts - 1);
  if (t <= 0.0) return 0;
  if (t >= last) return spec.gamma_pts - 1;
  // Nearest integer to t with halves rounding down.
  return static_cast<std::uint64_t>(std::ceil(t - 0.5));
}

double q_cd_prime(const QuantSpec& spec, double u, std::uint64_t index) {
  check_dither(u);
  if (index >= spec.gamma_pts)
    throw InvalidArgument("q_cd_prime: index " + std::to_string(index) +
                          " out of range for Gamma=" +
                          std::to_string(spec.gamma_pts));
  const std::int64_t i = lowest_offset(spec.gamma_pts, u) + static_cast<std::int64_t>(index);
  return static_cast<double>(i) + u;
}

}  // namespace pba
