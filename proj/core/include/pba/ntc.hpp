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

// Numerics for the variable-rate (entropy-coded) linear transform coding
// objective with a factorized entropy model and dithered latents.
//
// For a Gaussian latent of variance s plus uniform dither on [-1/2, 1/2],
// the per-component rate is the differential entropy
// rho(s) = h(sqrt(s) Z + eps), and d/ds rho(s) = J(sqrt(s) Z + eps) / 2.
// Entropies are in nats throughout.

#ifndef PBA_NTC_HPP_
#define PBA_NTC_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pba/matrix.hpp"

namespace pba {

inline constexpr double kDitherVariance = 1.0 / 12.0;
inline constexpr double kDefaultQuadTol = 1e-10;

// Density of sqrt(s) Z + eps: Phi((x + 1/2)/sqrt(s)) - Phi((x - 1/2)/sqrt(s)),
// evaluated through erfc so the tails keep full relative precision.
double density_gauss_plus_uniform(double s, double x);

double density_gauss_plus_uniform_derivative(double s, double x);

// -int f ln f over [-(1/2 + 8 sqrt(s)), 1/2 + 8 sqrt(s)]; exactly 0 at s = 0.
// Adaptive Gauss-Kronrod; throws ConvergenceError when the error estimate
// exceeds abs_tol * max(1, |result|).
double rho_sl_ntc(double s, double abs_tol = kDefaultQuadTol);

// int f'^2 / f over the same window. Requires s > 0.
double fisher_info(double s, double abs_tol = kDefaultQuadTol);

struct EntropyGrid {
  std::vector<double> s_values;
  std::vector<double> h_values;
  std::vector<double> j_values;
};

// s_values must be ascending and positive.
EntropyGrid entropy_grid(std::span<const double> s_values);

// Factorized NTC Lagrangian of an eigen-aligned encoder with latent
// variances v: sum sigma2 sigma_i^2 / (sigma2 + v_i) + lambda sum rho(v_i),
// sigma2 = 1/12.
double ntc_lagrangian(std::span<const double> eigvals, std::span<const double> v,
                      double lambda);

// Same objective for a general encoder W (column j = direction w_j):
// tr K - tr(K W (W^T K W + I/12)^-1 W^T K) + lambda sum rho(w_j^T K w_j).
double ntc_objective(const Matrix& K, const Matrix& W, double lambda);

struct AlignedOptimum {
  std::vector<double> v;
  double objective = 0.0;
};

// Minimises ntc_lagrangian component by component: a log grid (plus v = 0)
// locates the basin, golden-section search polishes it.
AlignedOptimum ntc_aligned_optimum(std::span<const double> eigvals, double lambda);

struct AlignmentSearch {
  double best_objective = 0.0;
  Matrix best_W;
};

// Pure random search over general square encoders: each column gets a
// uniformly random direction and a log-uniform norm in [1e-4, 1e2], or is
// zero with probability 1/10. Deterministic for a given seed.
AlignmentSearch eigen_alignment_search(const Matrix& K, double lambda,
                                       std::size_t trials, std::uint64_t seed);

}  // namespace pba

#endif  // PBA_NTC_HPP_
