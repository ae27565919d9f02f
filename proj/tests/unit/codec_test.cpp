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

#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "pba/bitio.hpp"
#include "pba/codec.hpp"
#include "pba/error.hpp"
#include "test_support.hpp"

namespace pba {
namespace {

struct Source {
  Dataset train;
  Dataset eval;
  std::vector<double> eigvals;
};

Source make_source(std::size_t d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Source s;
  s.eigvals = testing::geometric_spectrum(d, 4.0, 0.7);
  const Matrix q = testing::random_orthogonal(d, rng);
  std::vector<double> mean(d);
  for (std::size_t i = 0; i < d; ++i) mean[i] = 0.5 * static_cast<double>(i) - 1.0;
  s.train = testing::gaussian_dataset(n, s.eigvals, q, mean, rng);
  s.eval = testing::gaussian_dataset(n, s.eigvals, q, mean, rng);
  return s;
}

double mse_per_dim(const Dataset& a, const Dataset& b) {
  double sq = 0.0;
  for (std::size_t j = 0; j < a.n(); ++j)
    for (std::size_t c = 0; c < a.d(); ++c) {
      const double e = a.samples()(j, c) - b.samples()(j, c);
      sq += e * e;
    }
  return sq / static_cast<double>(a.n() * a.d());
}

AllocatorConfig cfg_true(double lambda_true) {
  const auto base = AllocatorConfig::from_a(1.0);
  return base.with_lambda(AllocatorConfig::reduced_lambda(lambda_true, base.alpha));
}

TEST_SUITE("codec") {
  TEST_CASE("isotropic data above threshold codes nothing and decodes to the mean") {
    std::mt19937_64 rng(1);
    const Dataset data = testing::gaussian_dataset(200, {1.0, 1.0, 1.0},
                                                   Matrix::identity(3), {1.0, 2.0, 3.0}, rng);
    const PbaModel m = fit(data, cfg_true(1e6), 0).model;
    for (auto b : m.bits) CHECK(b == 0);
    CHECK(m.total_bits() == 0);
    const auto rec = encode_sample(m, 0, data.sample(0));
    CHECK(rec.empty());
    const auto y = decode_sample(m, 0, rec);
    for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == m.mean[i]);
  }

  TEST_CASE("larger eigenvalue never gets fewer bits") {
    std::mt19937_64 rng(2);
    const Dataset data =
        testing::gaussian_dataset(5000, {4.0, 1.0}, Matrix::identity(2), {}, rng);
    const FitResult r = fit(data, cfg_true(1e-3), 0);
    CHECK(r.model.bits[0] >= r.model.bits[1]);
    // Hand computation on the fitted spectrum.
    for (std::size_t i = 0; i < 2; ++i) {
      const double v = r.allocation.s[i] * r.allocation.s[i] * r.spectrum.eigvals[i];
      CHECK(r.model.v[i] == doctest::Approx(v).epsilon(1e-12));
      CHECK(r.model.bits[i] == gamma_bits(15.0, r.model.v[i]));
      CHECK(r.model.t[i] == doctest::Approx(r.spectrum.eigvals[i] * r.model.s[i] /
                                            (r.model.v[i] + 1.0 / 12.0)));
    }
  }

  TEST_CASE("fit and serialization are deterministic") {
    const Source s = make_source(6, 500, 3);
    const auto a = serialize_model(fit(s.train, cfg_true(1e-2), 9).model);
    const auto b = serialize_model(fit(s.train, cfg_true(1e-2), 9).model);
    CHECK(a == b);
    CHECK_THROWS_AS(fit(Dataset(Matrix(1, 3)), cfg_true(1.0), 0), InvalidArgument);
  }

  TEST_CASE("sample at the mean maps to the point nearest zero") {
    const Source s = make_source(4, 500, 4);
    const PbaModel m = fit(s.train, cfg_true(1e-3), 5).model;
    const auto rec = encode_sample(m, 17, m.mean);
    const auto y = decode_latents(m, 17, rec);
    for (std::size_t i = 0; i < m.d(); ++i) {
      if (m.bits[i] == 0) {
        CHECK(y[i] == 0.0);
        continue;
      }
      CHECK(std::abs(y[i]) <= 0.5);
    }
  }

  TEST_CASE("latents round trip through the record") {
    const Source s = make_source(5, 300, 5);
    const PbaModel m = fit(s.train, cfg_true(1e-3), 11).model;
    REQUIRE(m.total_bits() > 0);
    for (std::size_t j = 0; j < 50; ++j) {
      const auto rec = encode_sample(m, j, s.eval.sample(j));
      CHECK(rec.size() == m.record_bytes());
      const auto y = decode_latents(m, j, rec);
      // Re-encoding the reproduction points yields the same bits.
      std::vector<double> latent_point(m.d());
      for (std::size_t i = 0; i < m.d(); ++i) {
        if (m.bits[i] == 0) continue;
        const QuantSpec spec = m.quant_spec(i);
        const double u = dither({m.seed, j, static_cast<std::uint32_t>(i)});
        CHECK(q_cd_prime(spec, u, q_cd(spec, u, y[i])) == y[i]);
      }
      CHECK(decode_sample(m, j, rec) == decode_sample(m, j, rec));
    }
    auto rec = encode_sample(m, 0, s.eval.sample(0));
    rec.push_back(0);
    CHECK_THROWS_AS(decode_sample(m, 0, rec), FormatError);
    CHECK_THROWS_AS(encode_sample(m, 0, std::vector<double>{1.0}), InvalidArgument);
  }

  TEST_CASE("high-rate PCA mode reconstructs nearly losslessly") {
    const Source s = make_source(6, 1000, 6);
    const Trainer trainer(s.train);
    const PbaModel m = trainer.fit_pca(6, 16, 15.0, 1.0 / 12.0, 0).model;
    for (auto b : m.bits) CHECK(b == 16);
    const double P = fit_stats(s.eval).P;
    const Dataset rec = decode_container(m, make_container(m, encode_batch(m, s.eval)));
    for (std::size_t j = 0; j < s.eval.n(); ++j) {
      double sq = 0.0;
      for (std::size_t c = 0; c < 6; ++c) {
        const double e = rec.samples()(j, c) - s.eval.samples()(j, c);
        sq += e * e;
      }
      CHECK(std::sqrt(sq) < 1e-2 * std::sqrt(P));
    }
  }

  TEST_CASE("model file round trip and corruption") {
    testing::TempDir dir("model");
    const Source s = make_source(3, 200, 7);
    const PbaModel m = fit(s.train, cfg_true(1e-2), 3).model;
    write_model(m, dir.file("m.pbam"));
    CHECK(read_model(dir.file("m.pbam")) == m);
    auto bytes = serialize_model(m);
    CHECK(bytes.size() == 4 + 4 + 4 + 8 + 8 + 8 + 8 * (3 + 9 + 3 + 3 + 3) + 3);

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_WITH_AS(deserialize_model(bad), doctest::Contains("bad magic"), FormatError);
    bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_WITH_AS(deserialize_model(bad), doctest::Contains("unsupported version"),
                         FormatError);
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(deserialize_model(bad), FormatError);
    bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(deserialize_model(bad), FormatError);
  }

  TEST_CASE("any single-byte model change alters the hash") {
    const Source s = make_source(2, 100, 8);
    const auto bytes = serialize_model(fit(s.train, cfg_true(1e-2), 3).model);
    const Sha256 h = sha256(bytes);
    for (std::size_t k = 0; k < bytes.size(); ++k) {
      auto b = bytes;
      b[k] ^= 0x01;
      CHECK(sha256(b) != h);
    }
  }

  TEST_CASE("sha256 matches a published test vector") {
    const std::string abc = "abc";
    const Sha256 h = sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()));
    const std::uint8_t expect[4] = {0xba, 0x78, 0x16, 0xbf};
    CHECK(std::memcmp(h.data(), expect, 4) == 0);
    CHECK(h[31] == 0xad);
  }

  TEST_CASE("container random access and file layout") {
    testing::TempDir dir("container");
    const Source s = make_source(4, 200, 9);
    const PbaModel m = fit(s.train, cfg_true(1e-3), 1).model;
    const Dataset three = s.eval.slice(0, 3);
    const auto records = encode_batch(m, three);
    const Container c = make_container(m, records);
    CHECK(c.n == 3);
    CHECK(c.payload.size() == 3 * m.record_bytes());
    const auto r2 = random_access(c, 2);
    CHECK(std::vector<std::uint8_t>(r2.begin(), r2.end()) == records[2]);
    CHECK_THROWS_AS(random_access(c, 3), InvalidArgument);

    write_container(c, dir.file("c.pbac"));
    const auto raw = read_file(dir.file("c.pbac"));
    CHECK(raw.size() == kContainerHeaderSize + 3 * m.record_bytes());
    CHECK(std::memcmp(raw.data(), "PBAC", 4) == 0);
    CHECK(read_record_at(dir.file("c.pbac"), 1) == records[1]);
    const Container back = read_container(dir.file("c.pbac"));
    CHECK(back.payload == c.payload);
    CHECK(back.model_hash == model_hash(m));
    CHECK(decode_container(m, back) == decode_container(m, c));
  }

  TEST_CASE("wrong model is rejected") {
    const Source s = make_source(4, 200, 10);
    const PbaModel m = fit(s.train, cfg_true(1e-3), 1).model;
    const PbaModel other = fit(s.train, cfg_true(1e-3), 2).model;
    const Container c = make_container(m, encode_batch(m, s.eval.slice(0, 5)));
    CHECK_THROWS_AS(decode_container(other, c), HashMismatch);
    CHECK_THROWS_AS(check_model(c, other), HashMismatch);
  }

  TEST_CASE("empty container round trips") {
    testing::TempDir dir("empty");
    const Source s = make_source(3, 100, 11);
    const PbaModel m = fit(s.train, cfg_true(1e-3), 1).model;
    const Dataset empty;
    const Container c = make_container(m, encode_batch(m, empty));
    CHECK(c.n == 0);
    write_container(c, dir.file("e.pbac"));
    const Container back = read_container(dir.file("e.pbac"));
    CHECK(back.n == 0);
    CHECK(decode_container(m, back).n() == 0);
  }

  TEST_CASE("truncated container payload is a format error") {
    const Source s = make_source(3, 100, 12);
    const PbaModel m = fit(s.train, cfg_true(1e-3), 1).model;
    auto bytes = serialize_container(make_container(m, encode_batch(m, s.eval.slice(0, 4))));
    bytes.pop_back();
    CHECK_THROWS_AS(deserialize_container(bytes), FormatError);
  }

  TEST_CASE("decoder coefficients are a stationary point of the MSE") {
    const Source s = make_source(6, 4000, 13);
    const PbaModel m = fit(s.train, cfg_true(2e-2), 1).model;
    const auto records = encode_batch(m, s.eval);
    const Container c = make_container(m, records);
    const double base = mse_per_dim(s.eval, decode_container(m, c));
    for (double f : {0.9, 1.1}) {
      PbaModel p = m;
      for (auto& t : p.t) t *= f;
      Container cp = c;
      cp.model_hash = model_hash(p);
      CHECK(mse_per_dim(s.eval, decode_container(p, cp)) > base);
    }
  }

  TEST_CASE("rate targeting never exceeds the target") {
    const Source s = make_source(8, 1000, 14);
    const Trainer trainer(s.train);
    for (double target : {0.0, 0.5, 1.0, 2.0, 3.3}) {
      const FitResult r = trainer.fit_target_bits(target, 15.0, 1.0 / 12.0, 0);
      const double bits = static_cast<double>(r.model.total_bits()) / 8.0;
      CHECK(bits <= target);
      CHECK(bits >= target - 1.5);
    }
  }

  TEST_CASE("frozen dither reuses one value per component") {
    const Source s = make_source(3, 200, 15);
    const PbaModel m = fit(s.train, cfg_true(1e-3), 1).model;
    const auto frozen = encode_batch(m, s.eval, DitherMode::kPerComponent);
    for (std::size_t j = 0; j < 20; ++j) {
      CHECK(frozen[j] == encode_sample(m, 0, s.eval.sample(j)));
      CHECK(decode_sample(m, j, frozen[j], DitherMode::kPerComponent) ==
            decode_sample(m, 0, frozen[j]));
    }
  }
}

}  // namespace
}  // namespace pba
