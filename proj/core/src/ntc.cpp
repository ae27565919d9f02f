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

#include "pba/ntc.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "pba/error.hpp"

namespace pba {
namespace {

constexpr double kWindowSigmas = 8.0;
constexpr unsigned kMaxDepth = 25;
constexpr double kRelTol = 1e-11;
constexpr std::size_t kAlignedGrid = 400;

double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

void require_positive(double s, const char* what) {
  if (!(s > 0.0) || !std::isfinite(s))
    throw InvalidArgument(std::string(what) + ": s must be positive and finite");
}

// Density and x-derivative at |x| = 1/2 + sd * t. Working in t keeps full
// precision next to the dither edge, where x - 1/2 would cancel.
double density_local(double t, double inv_sd) {
  return upper_tail(t) - upper_tail(t + inv_sd);
}

// 1 - density, accurate inside the dither interval (t < 0) where the
// density itself rounds to 1.
double density_complement_local(double t, double inv_sd) {
  return upper_tail(-t) + upper_tail(t + inv_sd);
}

// phi(t + h) - phi(t) = phi(t) expm1(-h (t + h/2)), free of cancellation.
double derivative_local(double t, double inv_sd) {
  return normal_pdf(t) * std::expm1(-inv_sd * (t + 0.5 * inv_sd)) * inv_sd;
}

// Integrates an even integrand g(t, 1/sd) over x in the symmetric window,
// substituting x = 1/2 + sd t on the positive half. Panels break at the
// edge of the Gaussian band around the dither edge and at the edge itself.
template <class G>
double integrate_even(G g, double s, double abs_tol, const char* what) {
  using boost::math::quadrature::gauss_kronrod;
  const double sd = std::sqrt(s);
  const double inv_sd = 1.0 / sd;
  const double t0 = -0.5 * inv_sd;
  const double breaks[] = {t0, std::max(t0, -kWindowSigmas), 0.0, kWindowSigmas};
  auto f = [&](double t) { return g(t, inv_sd); };
  double total = 0.0;
  double err = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (!(breaks[k + 1] > breaks[k])) continue;
    double e = 0.0;
    total += gauss_kronrod<double, 15>::integrate(f, breaks[k], breaks[k + 1], kMaxDepth,
                                                  kRelTol, &e);
    err += e;
  }
  total *= 2.0 * sd;
  err *= 2.0 * sd;
  if (!(err <= abs_tol * std::max(1.0, std::abs(total))) || !std::isfinite(total))
    throw ConvergenceError(std::string(what) + ": quadrature error estimate " +
                           std::to_string(err) + " above tolerance");
  return total;
}

double golden_section(const auto& f, double lo, double hi) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace

double density_gauss_plus_uniform(double s, double x) {
  require_positive(s, "density");
  const double sd = std::sqrt(s);
  const double ax = std::abs(x);  // symmetric in x
  const double hi = (ax + 0.5) / sd;
  const double lo = (ax - 0.5) / sd;
  return upper_tail(lo) - upper_tail(hi);
}

double density_gauss_plus_uniform_derivative(double s, double x) {
  require_positive(s, "density derivative");
  const double sd = std::sqrt(s);
  return (normal_pdf((x + 0.5) / sd) - normal_pdf((x - 0.5) / sd)) / sd;
}

double rho_sl_ntc(double s, double abs_tol) {
  if (s == 0.0) return 0.0;
  require_positive(s, "rho_sl_ntc");
  auto integrand = [](double t, double inv_sd) {
    if (t < 0.0) {
      const double c = density_complement_local(t, inv_sd);
      if (c < 0.5) return -(1.0 - c) * std::log1p(-c);
    }
    const double f = density_local(t, inv_sd);
    return f > 0.0 ? -f * std::log(f) : 0.0;
  };
  return integrate_even(integrand, s, abs_tol, "rho_sl_ntc");
}

double fisher_info(double s, double abs_tol) {
  require_positive(s, "fisher_info");
  auto integrand = [](double t, double inv_sd) {
    const double f = density_local(t, inv_sd);
    if (!(f > 0.0)) return 0.0;
    const double df = derivative_local(t, inv_sd);
    return df * df / f;
  };
  return integrate_even(integrand, s, abs_tol, "fisher_info");
}

EntropyGrid entropy_grid(std::span<const double> s_values) {
  EntropyGrid g;
  for (std::size_t i = 0; i < s_values.size(); ++i) {
    require_positive(s_values[i], "entropy_grid");
    if (i > 0 && s_values[i] <= s_values[i - 1])
      throw InvalidArgument("entropy_grid: s values must be ascending");
    g.s_values.push_back(s_values[i]);
    g.h_values.push_back(rho_sl_ntc(s_values[i]));
    g.j_values.push_back(fisher_info(s_values[i]));
  }
  return g;
}

double ntc_lagrangian(std::span<const double> eigvals, std::span<const double> v,
                      double lambda) {
  if (eigvals.size() != v.size())
    throw InvalidArgument("ntc_lagrangian: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0)) throw InvalidArgument("ntc_lagrangian: negative variance");
    total += kDitherVariance * eigvals[i] / (kDitherVariance + v[i]);
    if (v[i] > 0.0) total += lambda * rho_sl_ntc(v[i]);
  }
  return total;
}

double ntc_objective(const Matrix& K, const Matrix& W, double lambda) {
  const std::size_t d = K.rows();
  if (K.cols() != d || W.rows() != d)
    throw InvalidArgument("ntc_objective: shape mismatch");
  const std::size_t k = W.cols();
  const Matrix KW = multiply(K, W);              // d x k
  Matrix M = multiply(W.transposed(), KW);       // k x k
  std::vector<double> latent_var(k);
  for (std::size_t j = 0; j < k; ++j) {
    latent_var[j] = std::max(0.0, M(j, j));
    M(j, j) += kDitherVariance;
  }
  // tr(K W M^-1 W^T K) = sum_r b_r^T M^-1 b_r over the rows b_r of K W.
  double explained = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    auto b = KW.row(r);
    const auto x = solve_spd(M, b);
    explained += dot(b, x);
  }
  double total = trace(K) - explained;
  for (double v : latent_var)
    if (v > 0.0) total += lambda * rho_sl_ntc(v);
  return total;
}

AlignedOptimum ntc_aligned_optimum(std::span<const double> eigvals, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("ntc_aligned_optimum: lambda must be > 0");
  AlignedOptimum out;
  out.v.assign(eigvals.size(), 0.0);
  for (std::size_t i = 0; i < eigvals.size(); ++i) {
    const double var = eigvals[i];
    if (var <= 0.0) continue;
    auto g = [&](double v) {
      return kDitherVariance * var / (kDitherVariance + v) +
             (v > 0.0 ? lambda * rho_sl_ntc(v) : 0.0);
    };
    const double lo = 1e-10;
    const double hi = 1e3 * (var / lambda + 1.0);
    std::vector<double> grid(kAlignedGrid + 1);
    grid[0] = 0.0;
    for (std::size_t k = 1; k <= kAlignedGrid; ++k)
      grid[k] = lo * std::pow(hi / lo, static_cast<double>(k - 1) / (kAlignedGrid - 1));
    std::size_t arg = 0;
    double best = g(0.0);
    for (std::size_t k = 1; k <= kAlignedGrid; ++k) {
      const double val = g(grid[k]);
      if (val < best) {
        best = val;
        arg = k;
      }
    }
    double v_best = grid[arg];
    if (arg > 0) {
      const double a = grid[arg - 1];
      const double b = grid[std::min(arg + 1, kAlignedGrid)];
      const double v_ref = golden_section(g, a, b);
      const double val = g(v_ref);
      if (val < best) {
        best = val;
        v_best = v_ref;
      }
    }
    out.v[i] = v_best;
    out.objective += best;
  }
  return out;
}

AlignmentSearch eigen_alignment_search(const Matrix& K, double lambda,
                                       std::size_t trials, std::uint64_t seed) {
  const std::size_t d = K.rows();
  if (K.cols() != d || d == 0) throw InvalidArgument("alignment search: K not square");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_norm(std::log(1e-4), std::log(1e2));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  AlignmentSearch out;
  out.best_objective = std::numeric_limits<double>::infinity();
  Matrix W(d, d);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (std::size_t c = 0; c < d; ++c) {
      const bool zero = unit(rng) < 0.1;
      std::vector<double> dir(d);
      double norm2 = 0.0;
      for (auto& x : dir) {
        x = normal(rng);
        norm2 += x * x;
      }
      const double scale = zero ? 0.0 : std::exp(log_norm(rng)) / std::sqrt(norm2);
      for (std::size_t r = 0; r < d; ++r) W(r, c) = dir[r] * scale;
    }
    const double obj = ntc_objective(K, W, lambda);
    if (obj < out.best_objective) {
      out.best_objective = obj;
      out.best_W = W;
    }
  }
  return out;
}

}  // namespace pba
