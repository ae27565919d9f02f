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

#ifndef PBA_SPECTRAL_HPP_
#define PBA_SPECTRAL_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "pba/matrix.hpp"

namespace pba {

// Eigen-decomposition K = U diag(eigvals) U^T of a covariance matrix.
//
// eigvals are sorted descending and clamped at zero. Column i of eigvecs is
// the unit eigenvector for eigvals[i], with its largest-magnitude entry
// non-negative (first such index on ties), so the result is deterministic.
struct Spectrum {
  std::vector<double> eigvals;
  Matrix eigvecs;

  std::size_t d() const { return eigvals.size(); }
  std::vector<double> eigvec(std::size_t i) const { return eigvecs.column(i); }
};

// Builds a spectrum directly from descending eigenvalues with U = I.
Spectrum diagonal_spectrum(std::vector<double> eigvals);

// Cyclic Jacobi. Sweeps until every off-diagonal entry is below
// 1e-12 * max|K|; gives up after 100 sweeps with ConvergenceError.
// Rejects K that is not square, not symmetric to 1e-10 (relative), or has
// an eigenvalue below -1e-10 * trace(K).
Spectrum eigendecompose(const Matrix& K);

// U^T x.
std::vector<double> project(const Spectrum& spectrum, std::span<const double> x);

// U diag(eigvals) U^T, for reconstruction checks.
Matrix reconstruct(const Spectrum& spectrum);

}  // namespace pba

#endif  // PBA_SPECTRAL_HPP_
