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

#include "pba/codec.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "pba/bitio.hpp"
#include "pba/error.hpp"
#include "pba/parallel.hpp"

namespace pba {
namespace {

constexpr char kModelMagic[4] = {'P', 'B', 'A', 'M'};
constexpr char kContainerMagic[4] = {'P', 'B', 'A', 'C'};
constexpr int kBisectionSteps = 200;

std::uint64_t dither_sample(std::uint64_t sample_index, DitherMode mode) {
  return mode == DitherMode::kPerSample ? sample_index : 0;
}

void check_magic(ByteReader& rd, const char (&magic)[4], const char* what) {
  auto m = rd.get_bytes(4, "magic");
  if (std::memcmp(m.data(), magic, 4) != 0)
    throw FormatError(std::string(what) + ": bad magic");
  const std::uint32_t version = rd.get_u32("version");
  if (version != kFormatVersion)
    throw FormatError(std::string(what) + ": unsupported version " +
                      std::to_string(version));
}

}  // namespace

std::uint32_t PbaModel::total_bits() const {
  std::uint32_t total = 0;
  for (auto b : bits) total += b;
  return total;
}

QuantSpec PbaModel::quant_spec(std::size_t i) const {
  QuantSpec spec;
  spec.a = a;
  spec.v = v[i];
  spec.bits = bits[i];
  spec.gamma_pts = std::uint64_t{1} << bits[i];
  return spec;
}

Trainer::Trainer(const Dataset& train) {
  if (train.n() < 2) throw InvalidArgument("fit: need at least 2 samples");
  stats_ = fit_stats(train);
  spectrum_ = eigendecompose(stats_.K);
}

PbaModel Trainer::build_model(const Allocation& alloc, double a, double sigma2,
                              std::uint64_t seed) const {
  const std::size_t d = stats_.d();
  if (alloc.s.size() != d) throw InvalidArgument("allocation dimension mismatch");
  PbaModel m;
  m.mean = stats_.mean;
  m.U = spectrum_.eigvecs;
  m.a = a;
  m.sigma2 = sigma2;
  m.seed = seed;
  m.s = alloc.s;
  m.v.assign(d, 0.0);
  m.t.assign(d, 0.0);
  m.bits.assign(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    if (m.s[i] <= 0.0) continue;
    // Empirical latent variance over the training set: s^2 u^T K u.
    const auto u = spectrum_.eigvec(i);
    double quad = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      double kr = 0.0;
      auto krow = stats_.K.row(r);
      for (std::size_t c = 0; c < d; ++c) kr += krow[c] * u[c];
      quad += u[r] * kr;
    }
    m.v[i] = m.s[i] * m.s[i] * quad;
    m.bits[i] = static_cast<std::uint8_t>(gamma_bits(a, m.v[i]));
    m.t[i] = spectrum_.eigvals[i] * m.s[i] / (m.v[i] + sigma2);
  }
  return m;
}

FitResult Trainer::fit(const AllocatorConfig& cfg, std::uint64_t seed) const {
  FitResult r;
  r.allocation = pba_allocate(spectrum_, cfg);
  r.model = build_model(r.allocation, cfg.a, cfg.sigma2, seed);
  r.spectrum = spectrum_;
  r.stats = stats_;
  return r;
}

FitResult Trainer::fit_pca(std::size_t k, int gain_bits, double a, double sigma2,
                           std::uint64_t seed) const {
  FitResult r;
  r.allocation = pca_allocate(spectrum_, k, gain_bits, a, sigma2);
  r.model = build_model(r.allocation, a, sigma2, seed);
  r.spectrum = spectrum_;
  r.stats = stats_;
  return r;
}

FitResult Trainer::fit_target_bits(double target_bits_per_dim, double a,
                                   double sigma2, std::uint64_t seed) const {
  if (!(target_bits_per_dim >= 0.0))
    throw InvalidArgument("target bits must be non-negative");
  const double d = static_cast<double>(stats_.d());
  const auto base = AllocatorConfig::from_a(1.0, a, sigma2);
  const double top = spectrum_.eigvals.empty() ? 0.0 : spectrum_.eigvals[0];
  if (top <= 0.0) return fit(base, seed);

  auto bits_at = [&](double lambda) {
    return static_cast<double>(
               build_model(pba_allocate(spectrum_, base.with_lambda(lambda)), a,
                           sigma2, seed)
                   .total_bits()) /
           d;
  };
  double hi = zero_rate_threshold(spectrum_, base);  // rate 0 here
  double lo = 1e-14 * top;
  if (bits_at(lo) <= target_bits_per_dim) return fit(base.with_lambda(lo), seed);
  for (int step = 0; step < kBisectionSteps && hi / lo > 1.0 + 1e-13; ++step) {
    const double mid = std::sqrt(lo * hi);
    if (bits_at(mid) <= target_bits_per_dim)
      hi = mid;
    else
      lo = mid;
  }
  return fit(base.with_lambda(hi), seed);
}

FitResult fit(const Dataset& data, const AllocatorConfig& cfg, std::uint64_t seed) {
  return Trainer(data).fit(cfg, seed);
}

std::vector<std::uint8_t> encode_sample(const PbaModel& model,
                                        std::uint64_t sample_index,
                                        std::span<const double> x,
                                        DitherMode mode) {
  const std::size_t d = model.d();
  if (x.size() != d) throw InvalidArgument("encode: dimension mismatch");
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < d; ++r) centered[r] = x[r] - model.mean[r];
  BitWriter bw;
  for (std::size_t i = 0; i < d; ++i) {
    if (model.bits[i] == 0) continue;
    double proj = 0.0;
    for (std::size_t r = 0; r < d; ++r) proj += model.U(r, i) * centered[r];
    const double latent = model.s[i] * proj;
    const double u = dither({model.seed, dither_sample(sample_index, mode),
                             static_cast<std::uint32_t>(i)});
    bw.put(q_cd(model.quant_spec(i), u, latent), model.bits[i]);
  }
  return bw.finish();
}

std::vector<double> decode_latents(const PbaModel& model, std::uint64_t sample_index,
                                   std::span<const std::uint8_t> record,
                                   DitherMode mode) {
  const std::size_t d = model.d();
  if (record.size() != model.record_bytes())
    throw FormatError("record length " + std::to_string(record.size()) +
                      " does not match model (" +
                      std::to_string(model.record_bytes()) + " bytes)");
  std::vector<double> y(d, 0.0);
  BitReader br(record);
  for (std::size_t i = 0; i < d; ++i) {
    if (model.bits[i] == 0) continue;
    const double u = dither({model.seed, dither_sample(sample_index, mode),
                             static_cast<std::uint32_t>(i)});
    y[i] = q_cd_prime(model.quant_spec(i), u, br.get(model.bits[i]));
  }
  return y;
}

std::vector<double> decode_sample(const PbaModel& model, std::uint64_t sample_index,
                                  std::span<const std::uint8_t> record,
                                  DitherMode mode) {
  const auto y = decode_latents(model, sample_index, record, mode);
  const std::size_t d = model.d();
  std::vector<double> out = model.mean;
  for (std::size_t i = 0; i < d; ++i) {
    const double coef = model.t[i] * y[i];
    if (coef == 0.0) continue;
    for (std::size_t r = 0; r < d; ++r) out[r] += coef * model.U(r, i);
  }
  return out;
}

std::vector<std::uint8_t> serialize_model(const PbaModel& model) {
  const std::size_t d = model.d();
  if (model.U.rows() != d || model.U.cols() != d || model.s.size() != d ||
      model.v.size() != d || model.t.size() != d || model.bits.size() != d)
    throw InvalidArgument("model arrays inconsistent with d");
  ByteWriter w;
  w.put_tag({kModelMagic, 4});
  w.put_u32(kFormatVersion);
  w.put_u32(static_cast<std::uint32_t>(d));
  w.put_f64(model.a);
  w.put_f64(model.sigma2);
  w.put_u64(model.seed);
  for (double x : model.mean) w.put_f64(x);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t r = 0; r < d; ++r) w.put_f64(model.U(r, c));
  for (double x : model.s) w.put_f64(x);
  for (double x : model.v) w.put_f64(x);
  for (double x : model.t) w.put_f64(x);
  for (auto b : model.bits) w.put_u8(b);
  return w.take();
}

PbaModel deserialize_model(std::span<const std::uint8_t> bytes) {
  ByteReader rd(bytes, "PBAM");
  check_magic(rd, kModelMagic, "PBAM");
  const std::uint32_t d = rd.get_u32("d");
  // Each dimension needs at least d*8 + 41 bytes; reject absurd headers
  // before allocating.
  if (d == 0 || static_cast<double>(d) * d * 8 > static_cast<double>(rd.remaining()))
    throw FormatError("PBAM: truncated or invalid dimension " + std::to_string(d));
  PbaModel m;
  m.a = rd.get_f64("a");
  m.sigma2 = rd.get_f64("sigma2");
  m.seed = rd.get_u64("seed");
  auto read_vec = [&](std::vector<double>& out, const char* field) {
    out.resize(d);
    for (auto& x : out) x = rd.get_f64(field);
  };
  read_vec(m.mean, "mean");
  m.U = Matrix(d, d);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t r = 0; r < d; ++r) m.U(r, c) = rd.get_f64("U");
  read_vec(m.s, "s");
  read_vec(m.v, "v");
  read_vec(m.t, "t");
  m.bits.resize(d);
  for (auto& b : m.bits) b = rd.get_u8("bits");
  if (rd.remaining() != 0) throw FormatError("PBAM: trailing bytes");
  if (!(m.a > 0.0) || !(m.sigma2 > 0.0)) throw FormatError("PBAM: invalid a/sigma2");
  for (std::size_t i = 0; i < d; ++i)
    if (m.bits[i] > 62) throw FormatError("PBAM: bit width out of range");
  return m;
}

void write_model(const PbaModel& model, const std::string& path) {
  write_file(path, serialize_model(model));
}

PbaModel read_model(const std::string& path) {
  return deserialize_model(read_file(path));
}

Sha256 sha256(std::span<const std::uint8_t> bytes) {
  Sha256 out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != out.size())
    throw Error("sha256: digest failed");
  return out;
}

Sha256 model_hash(const PbaModel& model) { return sha256(serialize_model(model)); }

Container make_container(const PbaModel& model,
                         std::span<const std::vector<std::uint8_t>> records) {
  Container c;
  c.model_hash = model_hash(model);
  c.total_bits = model.total_bits();
  c.n = records.size();
  const std::size_t len = c.record_bytes();
  c.payload.reserve(len * records.size());
  for (std::size_t j = 0; j < records.size(); ++j) {
    if (records[j].size() != len)
      throw InvalidArgument("record " + std::to_string(j) + " has length " +
                            std::to_string(records[j].size()) + ", expected " +
                            std::to_string(len));
    c.payload.insert(c.payload.end(), records[j].begin(), records[j].end());
  }
  return c;
}

std::vector<std::uint8_t> serialize_container(const Container& c) {
  ByteWriter w;
  w.put_tag({kContainerMagic, 4});
  w.put_u32(kFormatVersion);
  w.put_bytes(c.model_hash);
  w.put_u64(c.n);
  w.put_u32(c.total_bits);
  w.put_bytes(c.payload);
  return w.take();
}

namespace {

Container parse_container_header(ByteReader& rd) {
  check_magic(rd, kContainerMagic, "PBAC");
  Container c;
  auto h = rd.get_bytes(32, "model hash");
  std::copy(h.begin(), h.end(), c.model_hash.begin());
  c.n = rd.get_u64("n");
  c.total_bits = rd.get_u32("total_bits");
  return c;
}

}  // namespace

Container deserialize_container(std::span<const std::uint8_t> bytes) {
  ByteReader rd(bytes, "PBAC");
  Container c = parse_container_header(rd);
  const double need = static_cast<double>(c.n) * static_cast<double>(c.record_bytes());
  if (need != static_cast<double>(rd.remaining()))
    throw FormatError("PBAC: payload size " + std::to_string(rd.remaining()) +
                      " does not match n * record length");
  auto payload = rd.get_bytes(rd.remaining(), "payload");
  c.payload.assign(payload.begin(), payload.end());
  return c;
}

void write_container(const Container& c, const std::string& path) {
  write_file(path, serialize_container(c));
}

Container read_container(const std::string& path) {
  return deserialize_container(read_file(path));
}

std::span<const std::uint8_t> random_access(const Container& c, std::uint64_t j) {
  if (j >= c.n) throw InvalidArgument("record index out of range");
  const std::size_t len = c.record_bytes();
  return std::span<const std::uint8_t>(c.payload).subspan(
      static_cast<std::size_t>(j) * len, len);
}

std::vector<std::uint8_t> read_record_at(const std::string& path, std::uint64_t j) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> header(kContainerHeaderSize);
  in.read(reinterpret_cast<char*>(header.data()),
          static_cast<std::streamsize>(header.size()));
  if (in.gcount() != static_cast<std::streamsize>(header.size()))
    throw FormatError("PBAC: truncated header");
  ByteReader rd(header, "PBAC");
  Container c = parse_container_header(rd);
  if (j >= c.n) throw InvalidArgument("record index out of range");
  std::vector<std::uint8_t> rec(c.record_bytes());
  in.seekg(static_cast<std::streamoff>(c.record_offset(j)));
  in.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
  if (in.gcount() != static_cast<std::streamsize>(rec.size()))
    throw FormatError("PBAC: truncated record");
  return rec;
}

void check_model(const Container& c, const PbaModel& model) {
  if (c.model_hash != model_hash(model))
    throw HashMismatch("container was not produced with this model");
  if (c.total_bits != model.total_bits())
    throw FormatError("PBAC: total_bits disagrees with model");
}

std::vector<std::vector<std::uint8_t>> encode_batch(const PbaModel& model,
                                                    const Dataset& data,
                                                    DitherMode mode) {
  if (data.n() > 0 && data.d() != model.d())
    throw InvalidArgument("encode: dataset dimension does not match model");
  std::vector<std::vector<std::uint8_t>> records(data.n());
  parallel_for(data.n(), [&](std::size_t j) {
    records[j] = encode_sample(model, j, data.sample(j), mode);
  });
  return records;
}

Dataset decode_container(const PbaModel& model, const Container& c, DitherMode mode) {
  check_model(c, model);
  Matrix out(c.n, model.d());
  parallel_for(c.n, [&](std::size_t j) {
    auto x = decode_sample(model, j, random_access(c, j), mode);
    std::copy(x.begin(), x.end(), out.row(j).begin());
  });
  return Dataset(std::move(out));
}

}  // namespace pba
