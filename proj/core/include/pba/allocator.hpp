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

// Rate allocation over the eigen-components of a covariance matrix.
//
// Each component i with variance sigma_i^2 is sent through a scalar encoder
// gain s_i, giving latent variance v_i = s_i^2 sigma_i^2 and a fixed-rate
// cost of 0.5 * ln(1 + gamma * v_i) nats, gamma = 4 a^2. With additive
// quantization noise of variance sigma2 and the optimal linear decoder, the
// source-domain MSE is sum sigma2 sigma_i^2 / (sigma2 + v_i).
//
// The solver works in reduced variables D_i = sigma_i^2 / (alpha + s'_i^2
// sigma_i^2), alpha = gamma * sigma2, where D_i <= sigma_i^2 / alpha and the
// true MSE is alpha * sum D_i. For a multiplier lambda it minimises
//
//     L(D) = sum D_i + lambda * sum ln(sigma_i^2 / D_i - (alpha - 1))
//          = sum D_i + 2 * lambda * rate_nats,
//
// whose interior stationary points are the roots of
// (alpha-1) D^2 - sigma_i^2 D + lambda sigma_i^2 = 0.

#ifndef PBA_ALLOCATOR_HPP_
#define PBA_ALLOCATOR_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "pba/spectral.hpp"

namespace pba {

inline constexpr double kDefaultA = 15.0;
inline constexpr double kDefaultSigma2 = 1.0 / 12.0;

struct AllocatorConfig {
  double lambda = 0.0;  // multiplier in reduced units (see file comment)
  double a = kDefaultA;
  double sigma2 = kDefaultSigma2;
  double gamma = 4.0 * kDefaultA * kDefaultA;
  double alpha = 4.0 * kDefaultA * kDefaultA * kDefaultSigma2;

  // gamma = 4 a^2, alpha = gamma * sigma2. Throws unless lambda > 0, a > 0,
  // sigma2 > 0 and alpha > 2.
  static AllocatorConfig from_a(double lambda, double a = kDefaultA,
                                double sigma2 = kDefaultSigma2);
  // Same, parameterised by alpha directly (a = sqrt(alpha / sigma2) / 2).
  static AllocatorConfig from_alpha(double lambda, double alpha,
                                    double sigma2 = kDefaultSigma2);

  AllocatorConfig with_lambda(double lambda) const;

  // Converts between the reduced multiplier and lambda_true, the price of
  // one nat of rate in source-domain MSE: true_mse + lambda_true * rate_nats
  // is alpha times the reduced Lagrangian when lambda_true = 2 alpha lambda.
  double lambda_true() const { return 2.0 * alpha * lambda; }
  static double reduced_lambda(double lambda_true, double alpha) {
    return lambda_true / (2.0 * alpha);
  }
};

// One of the 2*dbar stationary candidates. Candidate index 2r-1 uses convex
// roots on components 1..r; index 2r uses convex roots on 1..r-1 and the
// concave root on component r. Every other component sits at the boundary
// D_i = sigma_i^2 / alpha with zero rate.
struct CandidateSolution {
  std::size_t r = 0;
  bool concave_tail = false;
  std::vector<double> D;
  std::vector<double> rates;  // per-component nats
  double rate_nats = 0.0;
  double lagrangian = 0.0;
  bool feasible = false;

  std::size_t index() const { return concave_tail ? 2 * r : 2 * r - 1; }
};

struct Allocation {
  double lambda = 0.0;
  std::vector<double> D;
  std::vector<double> rates;  // per-component nats
  std::vector<double> s;      // encoder gains
  std::vector<double> v;      // latent variances s_i^2 sigma_i^2
  double rate_nats = 0.0;
  double reduced_distortion = 0.0;  // sum D_i
  double true_mse = 0.0;            // alpha * sum D_i
  double lagrangian = 0.0;          // reduced Lagrangian at lambda
  std::size_t active = 0;
  std::size_t candidate = 0;  // 0 = zero-rate solution

  std::size_t d() const { return D.size(); }
};

struct RDPoint {
  double lambda = 0.0;
  double rate_nats = 0.0;
  double true_mse = 0.0;
  std::size_t candidate = 0;
  std::size_t active = 0;
};

// Largest lambda with a nonzero-rate stationary point: sigma_1^2 / (4(alpha-1)).
double zero_rate_threshold(const Spectrum& spectrum, const AllocatorConfig& cfg);

// Exactly 2*dbar candidates in index order, dbar = #{i : lambda <
// sigma_i^2 / (4(alpha-1))}. Candidates whose D_i exceeds the boundary or
// whose per-component rate is negative are tagged infeasible.
std::vector<CandidateSolution> enumerate_candidates(const Spectrum& spectrum,
                                                    const AllocatorConfig& cfg);

// Lagrangian-optimal allocation: the best feasible candidate, or the
// zero-rate solution when that is at least as good. Ties within 1e-12 go to
// the lowest candidate index.
Allocation pba_allocate(const Spectrum& spectrum, const AllocatorConfig& cfg);

// Maps reduced distortions to gains, latent variances and totals.
Allocation allocation_from_distortions(const Spectrum& spectrum,
                                       const AllocatorConfig& cfg,
                                       std::vector<double> D);

// Brute-force minimiser of the same Lagrangian. The problem is separable, so
// each component is minimised independently over a log-uniform grid on
// (sigma_i^2/alpha * 1e-14, sigma_i^2/alpha]. The grid is shared across
// components in normalised units D / sigma_i^2, which lets one table of
// logarithms serve every component and every lambda at fixed alpha.
class OracleGrid {
 public:
  OracleGrid(double alpha, std::size_t grid_size);

  Allocation allocate(const Spectrum& spectrum, const AllocatorConfig& cfg) const;

  std::size_t size() const { return delta_.size(); }

 private:
  double alpha_;
  std::vector<double> delta_;    // D / sigma^2, descending from 1/alpha
  std::vector<double> log_term_;  // ln(1/delta - (alpha - 1))
};

Allocation oracle_allocate(const Spectrum& spectrum, const AllocatorConfig& cfg,
                           std::size_t grid_size);

struct RDSweep {
  std::vector<RDPoint> selected;  // pba_allocate result per lambda, input order
  std::vector<RDPoint> frontier;  // Pareto-filtered union, rate descending
};

// Sweeps ascending lambdas. The frontier pools each lambda's selected point
// with every feasible candidate (concave tails included) and keeps the
// points not dominated in (rate_nats, true_mse).
RDSweep rd_sweep(const Spectrum& spectrum, const AllocatorConfig& base,
                 std::span<const double> lambdas);

// Keeps points with no other point at <= rate and <= mse (strict in one);
// exact duplicates collapse to the first. Output is sorted by rate descending.
std::vector<RDPoint> pareto_filter(std::vector<RDPoint> points);

// PCA baseline: the k leading components get latent variance
// (2^(2*gain_bits) - 1) / (4 a^2) (nudged up by 1e-9 relative so that
// re-estimated variances still clear the bit threshold), which makes the
// quantizer spend exactly gain_bits bits on each; the rest get s_i = 0.
Allocation pca_allocate(const Spectrum& spectrum, std::size_t k, int gain_bits,
                        double a = kDefaultA, double sigma2 = kDefaultSigma2);

}  // namespace pba

#endif  // PBA_ALLOCATOR_HPP_
