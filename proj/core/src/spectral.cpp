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

#include "pba/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pba/error.hpp"

namespace pba {
namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagTol = 1e-12;
constexpr double kSymmetryTol = 1e-10;
constexpr double kPsdTol = 1e-10;

double max_off_diagonal(const Matrix& a) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      best = std::max(best, std::abs(a(i, j)));
  return best;
}

// One Jacobi rotation zeroing a(p, q); accumulates the rotation into v.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = std::copysign(1.0, theta) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows();

  for (std::size_t k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

void fix_sign(Matrix& u, std::size_t col) {
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t r = 0; r < u.rows(); ++r) {
    if (std::abs(u(r, col)) > best) {
      best = std::abs(u(r, col));
      arg = r;
    }
  }
  if (u(arg, col) < 0.0)
    for (std::size_t r = 0; r < u.rows(); ++r) u(r, col) = -u(r, col);
}

}  // namespace

Spectrum diagonal_spectrum(std::vector<double> eigvals) {
  for (std::size_t i = 0; i < eigvals.size(); ++i) {
    if (!(eigvals[i] >= 0.0)) throw InvalidArgument("eigenvalues must be >= 0");
    if (i > 0 && eigvals[i] > eigvals[i - 1])
      throw InvalidArgument("eigenvalues must be sorted descending");
  }
  Spectrum sp;
  sp.eigvecs = Matrix::identity(eigvals.size());
  sp.eigvals = std::move(eigvals);
  return sp;
}

Spectrum eigendecompose(const Matrix& K) {
  const std::size_t n = K.rows();
  if (K.cols() != n) throw InvalidArgument("eigendecompose: matrix not square");
  if (n == 0) throw InvalidArgument("eigendecompose: empty matrix");
  const double scale = max_abs(K);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(K(i, j) - K(j, i)) > kSymmetryTol * scale)
        throw InvalidArgument("eigendecompose: matrix not symmetric");

  Matrix a = K;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (K(i, j) + K(j, i));
  Matrix v = Matrix::identity(n);

  const double threshold = kOffDiagTol * scale;
  int sweep = 0;
  while (max_off_diagonal(a) >= threshold && threshold > 0.0) {
    if (++sweep > kMaxSweeps)
      throw ConvergenceError("Jacobi did not converge in 100 sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        if (std::abs(a(p, q)) >= threshold) rotate(a, v, p, q);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  const double tr = trace(K);
  Spectrum sp;
  sp.eigvals.resize(n);
  sp.eigvecs = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double lam = a(order[i], order[i]);
    if (lam < -kPsdTol * std::max(tr, 0.0))
      throw InvalidArgument("eigendecompose: matrix not positive semidefinite");
    sp.eigvals[i] = std::max(lam, 0.0);
    for (std::size_t r = 0; r < n; ++r) sp.eigvecs(r, i) = v(r, order[i]);
    fix_sign(sp.eigvecs, i);
  }
  return sp;
}

std::vector<double> project(const Spectrum& spectrum, std::span<const double> x) {
  const std::size_t d = spectrum.d();
  if (x.size() != d) throw InvalidArgument("project: dimension mismatch");
  std::vector<double> out(d, 0.0);
  const Matrix& u = spectrum.eigvecs;
  for (std::size_t r = 0; r < d; ++r) {
    const double xr = x[r];
    auto urow = u.row(r);
    for (std::size_t i = 0; i < d; ++i) out[i] += urow[i] * xr;
  }
  return out;
}

Matrix reconstruct(const Spectrum& spectrum) {
  const std::size_t d = spectrum.d();
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        s += spectrum.eigvecs(i, k) * spectrum.eigvals[k] * spectrum.eigvecs(j, k);
      out(i, j) = s;
    }
  return out;
}

}  // namespace pba
