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

#include "pba/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string_view>

#include "pba/codec.hpp"
#include "pba/error.hpp"

namespace pba {
namespace {

double parse_number(std::string_view s, const char* what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last)
    throw InvalidArgument(std::string(what) + ": cannot parse '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

}  // namespace

ClipSpec parse_clip(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() < 2 || parts.size() > 3)
    throw InvalidArgument("clip: expected lo,hi[,round]");
  ClipSpec c;
  c.lo = parse_number(parts[0], "clip");
  c.hi = parse_number(parts[1], "clip");
  if (parts.size() == 3) {
    if (parts[2] != "round") throw InvalidArgument("clip: third field must be 'round'");
    c.round = true;
  }
  if (!(c.lo <= c.hi)) throw InvalidArgument("clip: lo must not exceed hi");
  return c;
}

Dataset apply_clip(const Dataset& data, const ClipSpec& clip) {
  Matrix m = data.samples();
  for (double& x : m.data()) {
    if (clip.round) x = std::nearbyint(x);
    x = std::clamp(x, clip.lo, clip.hi);
  }
  return Dataset(std::move(m));
}

EvalReport evaluate(const Dataset& original, const Dataset& reconstructed,
                    double P, double rate_bits_per_dim) {
  if (original.n() != reconstructed.n() || original.d() != reconstructed.d())
    throw InvalidArgument("evaluate: datasets differ in shape");
  if (original.n() == 0) throw InvalidArgument("evaluate: empty dataset");
  double sq = 0.0;
  for (std::size_t j = 0; j < original.n(); ++j) {
    auto x = original.sample(j);
    auto y = reconstructed.sample(j);
    for (std::size_t c = 0; c < x.size(); ++c) sq += (x[c] - y[c]) * (x[c] - y[c]);
  }
  EvalReport r;
  r.n = original.n();
  r.rate_bits_per_dim = rate_bits_per_dim;
  r.mse = sq / static_cast<double>(original.n() * original.d());
  r.snr_db = r.mse > 0.0 ? 10.0 * std::log10(P / r.mse)
                         : std::numeric_limits<double>::infinity();
  return r;
}

std::vector<double> parse_geom_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 4 || parts[0] != "geom")
    throw InvalidArgument("grid: expected geom:lo:hi:n");
  const double lo = parse_number(parts[1], "grid");
  const double hi = parse_number(parts[2], "grid");
  const double nd = parse_number(parts[3], "grid");
  if (!(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("grid: need 0 < lo <= hi");
  if (!(nd >= 1.0) || nd != std::floor(nd) || nd > 1e7)
    throw InvalidArgument("grid: n must be a positive integer");
  const auto n = static_cast<std::size_t>(nd);
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<RdCurveRow> run_rdcurve(const Dataset& data,
                                    const std::vector<double>& lambdas_true,
                                    const RdCurveOptions& opts) {
  if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0))
    throw InvalidArgument("rdcurve: train fraction must be in (0, 1)");
  const auto n_train = static_cast<std::size_t>(
      std::floor(opts.train_fraction * static_cast<double>(data.n())));
  if (n_train < 2 || n_train >= data.n())
    throw InvalidArgument("rdcurve: split leaves too few train or eval rows");
  const Dataset train = data.slice(0, n_train);
  const Dataset eval = data.slice(n_train, data.n());
  const double P = fit_stats(eval).P;
  const Trainer trainer(train);
  const double d = static_cast<double>(data.d());

  auto measure = [&](const PbaModel& model, std::string method, double param) {
    const Container c = make_container(model, encode_batch(model, eval));
    const Dataset rec = decode_container(model, c);
    const EvalReport r =
        evaluate(eval, rec, P, static_cast<double>(model.total_bits()) / d);
    return RdCurveRow{std::move(method), param, r.rate_bits_per_dim, r.mse, r.snr_db};
  };

  std::vector<RdCurveRow> rows;
  const auto base = AllocatorConfig::from_a(1.0, opts.a, opts.sigma2);
  for (double lt : lambdas_true) {
    const auto cfg = base.with_lambda(AllocatorConfig::reduced_lambda(lt, base.alpha));
    rows.push_back(measure(trainer.fit(cfg, opts.seed).model, "pba", lt));
  }
  if (opts.include_pca) {
    for (std::size_t k = 0; k <= data.d(); ++k) {
      const auto model =
          trainer.fit_pca(k, opts.gain_bits, opts.a, opts.sigma2, opts.seed).model;
      rows.push_back(measure(model, "pca", static_cast<double>(k)));
    }
  }
  return rows;
}

void write_rdcurve_csv(std::ostream& out, const std::vector<RdCurveRow>& rows) {
  out << "method,param,rate_bits_per_dim,mse,snr_db\n";
  for (const auto& r : rows)
    out << r.method << ',' << format_double(r.param) << ','
        << format_double(r.rate_bits_per_dim) << ',' << format_double(r.mse) << ','
        << format_double(r.snr_db) << '\n';
}

void write_rd_sweep_csv(std::ostream& out, const std::vector<RDPoint>& points,
                        const Spectrum& spectrum, const AllocatorConfig& cfg) {
  const double d = static_cast<double>(spectrum.d());
  double total = 0.0;
  for (double e : spectrum.eigvals) total += e;
  const double P = total / d;
  out << "lambda,rate_nats,rate_bits,true_mse,snr_db,active\n";
  for (const auto& p : points) {
    const double mse = p.true_mse / d;
    const double snr = mse > 0.0 ? 10.0 * std::log10(P / mse)
                                 : std::numeric_limits<double>::infinity();
    out << format_double(2.0 * cfg.alpha * p.lambda) << ','
        << format_double(p.rate_nats) << ','
        << format_double(p.rate_nats / std::numbers::ln2) << ','
        << format_double(p.true_mse) << ',' << format_double(snr) << ','
        << p.active << '\n';
  }
}

void write_entropy_csv(std::ostream& out, const EntropyGrid& grid) {
  out << "s,h_nats,fisher\n";
  for (std::size_t i = 0; i < grid.s_values.size(); ++i)
    out << format_double(grid.s_values[i]) << ',' << format_double(grid.h_values[i])
        << ',' << format_double(grid.j_values[i]) << '\n';
}

}  // namespace pba
