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

#include "pba/allocator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "pba/error.hpp"
#include "pba/parallel.hpp"
#include "pba/quantizer.hpp"

namespace pba {
namespace {

constexpr double kBoundarySlack = 1e-15;
constexpr double kRateSlack = 1e-12;
constexpr double kTieTolerance = 1e-12;
constexpr double kOracleRange = 1e-14;

void validate(const AllocatorConfig& cfg) {
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda))
    throw InvalidArgument("lambda must be positive and finite");
  if (!(cfg.a > 0.0) || !(cfg.sigma2 > 0.0))
    throw InvalidArgument("a and sigma2 must be positive");
  if (!(cfg.alpha > 2.0))
    throw InvalidArgument("alpha = 4 a^2 sigma2 must exceed 2");
}

// Number of leading strictly positive eigenvalues. Spectra are sorted, so
// zero eigenvalues form a suffix.
std::size_t positive_count(const Spectrum& sp) {
  std::size_t p = 0;
  while (p < sp.d() && sp.eigvals[p] > 0.0) ++p;
  return p;
}

// The two interior roots of (alpha-1) D^2 - sigma^2 D + lambda sigma^2 = 0
// for one component, with rates in nats. 1 - c is formed as
// (1 - c^2) / (1 + c) so small lambda keeps full precision.
struct Roots {
  double d_convex;
  double d_concave;
  double rate_convex;
  double rate_concave;
};

Roots component_roots(double var, double lambda, double alpha) {
  const double am1 = alpha - 1.0;
  const double q = 4.0 * lambda * am1 / var;  // 1 - c^2
  const double c = std::sqrt(std::max(0.0, 1.0 - q));
  const double one_minus_c = q / (1.0 + c);
  const double base = 0.5 * std::log(var / (4.0 * lambda));
  return Roots{
      var * one_minus_c / (2.0 * am1),
      var * (1.0 + c) / (2.0 * am1),
      base + std::log1p(c),
      base + std::log(one_minus_c),
  };
}

double sum(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

Allocation zero_rate_allocation(const Spectrum& sp, const AllocatorConfig& cfg) {
  std::vector<double> D(sp.d());
  for (std::size_t i = 0; i < sp.d(); ++i) D[i] = sp.eigvals[i] / cfg.alpha;
  Allocation out = allocation_from_distortions(sp, cfg, std::move(D));
  // Exact by construction: every gain is zero.
  out.true_mse = sum(sp.eigvals);
  out.rate_nats = 0.0;
  return out;
}

}  // namespace

AllocatorConfig AllocatorConfig::from_a(double lambda, double a, double sigma2) {
  AllocatorConfig cfg;
  cfg.lambda = lambda;
  cfg.a = a;
  cfg.sigma2 = sigma2;
  cfg.gamma = 4.0 * a * a;
  cfg.alpha = cfg.gamma * sigma2;
  validate(cfg);
  return cfg;
}

AllocatorConfig AllocatorConfig::from_alpha(double lambda, double alpha,
                                            double sigma2) {
  AllocatorConfig cfg;
  cfg.lambda = lambda;
  cfg.sigma2 = sigma2;
  cfg.alpha = alpha;
  cfg.gamma = alpha / sigma2;
  cfg.a = 0.5 * std::sqrt(cfg.gamma);
  validate(cfg);
  return cfg;
}

AllocatorConfig AllocatorConfig::with_lambda(double lambda) const {
  AllocatorConfig cfg = *this;
  cfg.lambda = lambda;
  validate(cfg);
  return cfg;
}

double zero_rate_threshold(const Spectrum& spectrum, const AllocatorConfig& cfg) {
  if (spectrum.d() == 0) return 0.0;
  return spectrum.eigvals[0] / (4.0 * (cfg.alpha - 1.0));
}

std::vector<CandidateSolution> enumerate_candidates(const Spectrum& spectrum,
                                                    const AllocatorConfig& cfg) {
  validate(cfg);
  const std::size_t d = spectrum.d();
  const std::size_t p = positive_count(spectrum);
  const double am1 = cfg.alpha - 1.0;

  std::size_t dbar = 0;
  while (dbar < p && cfg.lambda < spectrum.eigvals[dbar] / (4.0 * am1)) ++dbar;

  std::vector<Roots> roots(dbar);
  for (std::size_t i = 0; i < dbar; ++i)
    roots[i] = component_roots(spectrum.eigvals[i], cfg.lambda, cfg.alpha);

  std::vector<CandidateSolution> out;
  out.reserve(2 * dbar);
  for (std::size_t r = 1; r <= dbar; ++r) {
    for (bool concave : {false, true}) {
      CandidateSolution c;
      c.r = r;
      c.concave_tail = concave;
      c.D.resize(d);
      c.rates.assign(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        if (i + 1 < r || (i + 1 == r && !concave)) {
          c.D[i] = roots[i].d_convex;
          c.rates[i] = roots[i].rate_convex;
        } else if (i + 1 == r) {
          c.D[i] = roots[i].d_concave;
          c.rates[i] = roots[i].rate_concave;
        } else {
          c.D[i] = spectrum.eigvals[i] / cfg.alpha;
        }
      }
      c.rate_nats = sum(c.rates);
      c.lagrangian = sum(c.D) + 2.0 * cfg.lambda * c.rate_nats;
      c.feasible = true;
      for (std::size_t i = 0; i < d; ++i) {
        if (c.D[i] > spectrum.eigvals[i] / cfg.alpha + kBoundarySlack ||
            c.rates[i] < -kRateSlack) {
          c.feasible = false;
          break;
        }
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

Allocation allocation_from_distortions(const Spectrum& spectrum,
                                       const AllocatorConfig& cfg,
                                       std::vector<double> D) {
  const std::size_t d = spectrum.d();
  if (D.size() != d) throw InvalidArgument("distortion vector length mismatch");
  Allocation out;
  out.lambda = cfg.lambda;
  out.s.assign(d, 0.0);
  out.v.assign(d, 0.0);
  out.rates.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double var = spectrum.eigvals[i];
    if (var <= 0.0) {
      D[i] = 0.0;
      continue;
    }
    // 1 + gamma v_i = var / D_i - (alpha - 1). Boundary components carry
    // D_i = var / alpha bit-for-bit; the division would not round-trip.
    const double excess =
        D[i] >= var / cfg.alpha ? 0.0 : std::max(0.0, var / D[i] - cfg.alpha);
    out.v[i] = cfg.sigma2 * excess / cfg.alpha;
    out.s[i] = std::sqrt(out.v[i] / var);
    out.rates[i] = 0.5 * std::log1p(excess);
    if (out.s[i] > 0.0) ++out.active;
  }
  out.rate_nats = sum(out.rates);
  out.reduced_distortion = sum(D);
  out.true_mse = cfg.alpha * out.reduced_distortion;
  out.lagrangian = out.reduced_distortion + 2.0 * cfg.lambda * out.rate_nats;
  out.D = std::move(D);
  return out;
}

Allocation pba_allocate(const Spectrum& spectrum, const AllocatorConfig& cfg) {
  validate(cfg);
  if (positive_count(spectrum) == 0 ||
      cfg.lambda >= zero_rate_threshold(spectrum, cfg))
    return zero_rate_allocation(spectrum, cfg);

  auto candidates = enumerate_candidates(spectrum, cfg);
  // Convex roots on every component with a stationary point are always
  // admissible.
  assert(!candidates.empty() && candidates[candidates.size() - 2].feasible);

  Allocation zero = zero_rate_allocation(spectrum, cfg);
  const CandidateSolution* best = nullptr;
  double best_lag = zero.lagrangian;
  for (const auto& c : candidates) {
    if (!c.feasible) continue;
    if (c.lagrangian < best_lag - kTieTolerance) {
      best = &c;
      best_lag = c.lagrangian;
    }
  }
  if (best == nullptr) return zero;

  Allocation out = allocation_from_distortions(spectrum, cfg, best->D);
  out.candidate = best->index();
  // Report the closed-form rates; they agree with the re-derived ones to
  // rounding but are what the candidate was ranked on.
  out.rates = best->rates;
  out.rate_nats = best->rate_nats;
  out.lagrangian = best->lagrangian;
  return out;
}

OracleGrid::OracleGrid(double alpha, std::size_t grid_size) : alpha_(alpha) {
  if (grid_size < 2) throw InvalidArgument("oracle grid needs >= 2 points");
  if (!(alpha > 2.0)) throw InvalidArgument("alpha must exceed 2");
  delta_.resize(grid_size);
  log_term_.resize(grid_size);
  const double top = 1.0 / alpha;
  const double span = std::log(kOracleRange);
  for (std::size_t k = 0; k < grid_size; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(grid_size - 1);
    delta_[k] = k == 0 ? top : top * std::exp(span * frac);
    log_term_[k] = std::log(1.0 / delta_[k] - (alpha - 1.0));
  }
  log_term_[0] = 0.0;  // exactly the boundary: zero rate
}

Allocation OracleGrid::allocate(const Spectrum& spectrum,
                                const AllocatorConfig& cfg) const {
  validate(cfg);
  if (std::abs(cfg.alpha - alpha_) > 1e-12 * alpha_)
    throw InvalidArgument("oracle grid built for a different alpha");
  const std::size_t d = spectrum.d();
  std::vector<double> D(d, 0.0);
  std::vector<double> rates(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double var = spectrum.eigvals[i];
    if (var <= 0.0) continue;
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < delta_.size(); ++k) {
      const double f = var * delta_[k] + cfg.lambda * log_term_[k];
      if (f < best) {
        best = f;
        arg = k;
      }
    }
    D[i] = var * delta_[arg];
    rates[i] = 0.5 * log_term_[arg];
  }
  Allocation out = allocation_from_distortions(spectrum, cfg, std::move(D));
  out.rates = rates;
  out.rate_nats = sum(rates);
  out.lagrangian = out.reduced_distortion + 2.0 * cfg.lambda * out.rate_nats;
  return out;
}

Allocation oracle_allocate(const Spectrum& spectrum, const AllocatorConfig& cfg,
                           std::size_t grid_size) {
  if (grid_size < 1000) throw InvalidArgument("oracle grid_size must be >= 1000");
  return OracleGrid(cfg.alpha, grid_size).allocate(spectrum, cfg);
}

std::vector<RDPoint> pareto_filter(std::vector<RDPoint> points) {
  std::stable_sort(points.begin(), points.end(),
                   [](const RDPoint& x, const RDPoint& y) {
                     if (x.rate_nats != y.rate_nats) return x.rate_nats < y.rate_nats;
                     return x.true_mse < y.true_mse;
                   });
  std::vector<RDPoint> kept;
  double best_mse = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    if (p.true_mse < best_mse) {
      kept.push_back(p);
      best_mse = p.true_mse;
    }
  }
  std::reverse(kept.begin(), kept.end());
  return kept;
}

RDSweep rd_sweep(const Spectrum& spectrum, const AllocatorConfig& base,
                 std::span<const double> lambdas) {
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw InvalidArgument("lambdas must be positive");
    if (i > 0 && lambdas[i] < lambdas[i - 1])
      throw InvalidArgument("lambdas must be ascending");
  }
  std::vector<RDPoint> selected(lambdas.size());
  std::vector<std::vector<RDPoint>> pools(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t j) {
    const AllocatorConfig cfg = base.with_lambda(lambdas[j]);
    const Allocation a = pba_allocate(spectrum, cfg);
    selected[j] = RDPoint{cfg.lambda, a.rate_nats, a.true_mse, a.candidate, a.active};
    auto& pool = pools[j];
    pool.push_back(selected[j]);
    for (const auto& c : enumerate_candidates(spectrum, cfg)) {
      if (!c.feasible) continue;
      std::size_t active = std::min(c.r, spectrum.d());
      pool.push_back(RDPoint{cfg.lambda, c.rate_nats, cfg.alpha * sum(c.D),
                             c.index(), active});
    }
  });
  std::vector<RDPoint> all;
  for (auto& pool : pools) all.insert(all.end(), pool.begin(), pool.end());
  return RDSweep{std::move(selected), pareto_filter(std::move(all))};
}

Allocation pca_allocate(const Spectrum& spectrum, std::size_t k, int gain_bits,
                        double a, double sigma2) {
  if (k > spectrum.d()) throw InvalidArgument("pca_allocate: k exceeds d");
  if (gain_bits < 1 || gain_bits > 30)
    throw InvalidArgument("pca_allocate: gain_bits must be in [1, 30]");
  if (!(a > 0.0) || !(sigma2 > 0.0))
    throw InvalidArgument("pca_allocate: a and sigma2 must be positive");
  const double gamma = 4.0 * a * a;
  const double alpha = gamma * sigma2;
  const double target =
      (std::ldexp(1.0, 2 * gain_bits) - 1.0) / gamma * (1.0 + 1e-9);

  const std::size_t d = spectrum.d();
  Allocation out;
  out.D.assign(d, 0.0);
  out.rates.assign(d, 0.0);
  out.s.assign(d, 0.0);
  out.v.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double var = spectrum.eigvals[i];
    if (i < k && var > 0.0) {
      out.v[i] = target;
      out.s[i] = std::sqrt(target / var);
      ++out.active;
    }
    out.rates[i] = 0.5 * std::log1p(gamma * out.v[i]);
    out.D[i] = var / (alpha + gamma * out.v[i]);
  }
  out.rate_nats = sum(out.rates);
  out.reduced_distortion = sum(out.D);
  out.true_mse = alpha * out.reduced_distortion;
  out.lagrangian = out.reduced_distortion;
  return out;
}

}  // namespace pba
