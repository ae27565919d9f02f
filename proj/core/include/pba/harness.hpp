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

// Evaluation helpers shared by the command-line tool and the tests: SNR
// reports, parameter grids, rate-distortion sweeps and their CSV output.

#ifndef PBA_HARNESS_HPP_
#define PBA_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pba/allocator.hpp"
#include "pba/datastore.hpp"
#include "pba/ntc.hpp"

namespace pba {

struct EvalReport {
  double rate_bits_per_dim = 0.0;  // NaN when the rate is unknown
  double mse = 0.0;                // per dimension
  double snr_db = 0.0;             // 10 log10(P / mse); +inf when mse == 0
  std::size_t n = 0;
};

struct ClipSpec {
  double lo = 0.0;
  double hi = 0.0;
  bool round = false;
};

// "lo,hi" or "lo,hi,round".
ClipSpec parse_clip(const std::string& text);

// Clamps to [lo, hi], rounding to the nearest integer first when requested.
Dataset apply_clip(const Dataset& data, const ClipSpec& clip);

// Per-dimension MSE between matching rows and SNR against power P.
EvalReport evaluate(const Dataset& original, const Dataset& reconstructed,
                    double P, double rate_bits_per_dim);

// "geom:lo:hi:n": n geometrically spaced values, both endpoints included.
std::vector<double> parse_geom_grid(const std::string& text);

std::string format_double(double x);  // %.17g, with inf/nan spelled out

struct RdCurveRow {
  std::string method;  // "pba" or "pca"
  double param = 0.0;  // lambda_true for pba, k for pca
  double rate_bits_per_dim = 0.0;
  double mse = 0.0;
  double snr_db = 0.0;
};

struct RdCurveOptions {
  double a = kDefaultA;
  double sigma2 = kDefaultSigma2;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  bool include_pca = true;
  int gain_bits = 16;
};

// Fits on the leading train_fraction of the rows and measures realized
// rate/MSE by encoding and decoding the remaining rows. lambdas_true are
// prices per nat in source-domain MSE.
std::vector<RdCurveRow> run_rdcurve(const Dataset& data,
                                    const std::vector<double>& lambdas_true,
                                    const RdCurveOptions& opts);

void write_rdcurve_csv(std::ostream& out, const std::vector<RdCurveRow>& rows);

// Columns lambda,rate_nats,rate_bits,true_mse,snr_db,active. The lambda
// column carries lambda_true; snr_db uses P = sum(eigvals) / d.
void write_rd_sweep_csv(std::ostream& out, const std::vector<RDPoint>& points,
                        const Spectrum& spectrum, const AllocatorConfig& cfg);

void write_entropy_csv(std::ostream& out, const EntropyGrid& grid);

}  // namespace pba

#endif  // PBA_HARNESS_HPP_
