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

#include <cstring>
#include <random>
#include <string>

#include "doctest.h"
#include "pba/bitio.hpp"
#include "pba/datastore.hpp"
#include "pba/error.hpp"
#include "pba/spectral.hpp"
#include "test_support.hpp"

namespace pba {
namespace {

std::vector<std::uint8_t> f64bin_header(std::uint32_t n, std::uint32_t d) {
  ByteWriter w;
  w.put_bytes(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>("PBADATA\0"), 8));
  w.put_u32(n);
  w.put_u32(d);
  return w.take();
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST_SUITE("datastore") {
  TEST_CASE("csv parses rows") {
    const Dataset d = parse_csv("1,2\n3,4");
    REQUIRE(d.n() == 2);
    REQUIRE(d.d() == 2);
    CHECK(d.samples()(0, 0) == 1.0);
    CHECK(d.samples()(0, 1) == 2.0);
    CHECK(d.samples()(1, 0) == 3.0);
    CHECK(d.samples()(1, 1) == 4.0);
  }

  TEST_CASE("csv tolerates CRLF, trailing newline and exponent notation") {
    const Dataset d = parse_csv("1e-3,-2.5\r\n+3,4E2\n\n");
    REQUIRE(d.n() == 2);
    CHECK(d.samples()(0, 0) == 1e-3);
    CHECK(d.samples()(1, 0) == 3.0);
    CHECK(d.samples()(1, 1) == 400.0);
  }

  TEST_CASE("csv errors carry position") {
    CHECK(error_of([] { parse_csv("1,2\n3"); }).find("ragged row at line 2") !=
          std::string::npos);
    const std::string bad = error_of([] { parse_csv("1,2\n3,x"); });
    CHECK(bad.find("line 2") != std::string::npos);
    CHECK(bad.find("column 2") != std::string::npos);
    CHECK(error_of([] { parse_csv(""); }).find("n=0") != std::string::npos);
    CHECK_THROWS_AS(parse_csv("1,nan"), Error);
  }

  TEST_CASE("csv file round trip is exact") {
    testing::TempDir dir("csv");
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    Matrix m(7, 3);
    for (auto& x : m.data()) x = normal(rng) * 1e3;
    const Dataset d(m);
    write_csv(d, dir.file("x.csv"));
    CHECK(load_csv(dir.file("x.csv")) == d);
    CHECK(load_dataset(dir.file("x.csv")) == d);
    CHECK_THROWS_AS(load_csv(dir.file("missing.csv")), IoError);
  }

  TEST_CASE("f64bin decodes header plus zeros") {
    auto bytes = f64bin_header(1, 3);
    bytes.resize(bytes.size() + 24, 0);
    const Dataset d = decode_f64bin(bytes);
    CHECK(d.n() == 1);
    CHECK(d.d() == 3);
    for (double x : d.samples().data()) CHECK(x == 0.0);
  }

  TEST_CASE("f64bin rejects bad magic and truncation") {
    auto bytes = f64bin_header(1, 3);
    bytes.resize(bytes.size() + 24, 0);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK(error_of([&] { decode_f64bin(bad); }).find("bad magic") != std::string::npos);
    bytes.pop_back();
    CHECK(error_of([&] { decode_f64bin(bytes); }).find("truncated") != std::string::npos);
  }

  TEST_CASE("f64bin round trip including empty dataset") {
    testing::TempDir dir("bin");
    Matrix m(3, 2);
    m(2, 1) = -0.0;
    m(0, 0) = 1.0 / 3.0;
    const Dataset d(m);
    write_f64bin(d, dir.file("x.bin"));
    const Dataset back = load_dataset(dir.file("x.bin"));
    CHECK(back == d);
    CHECK(std::signbit(back.samples()(2, 1)));
    CHECK(decode_f64bin(encode_f64bin(Dataset())).n() == 0);
  }

  TEST_CASE("fit_stats examples") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(1, 0) = -1.0;
    auto s = fit_stats(Dataset(a));
    CHECK(s.mean == std::vector<double>{0.0, 0.0});
    CHECK(s.K(0, 0) == 1.0);
    CHECK(s.K(0, 1) == 0.0);
    CHECK(s.K(1, 1) == 0.0);
    CHECK(s.P == 0.5);

    Matrix b(1, 1, 5.0);
    s = fit_stats(Dataset(b));
    CHECK(s.mean[0] == 5.0);
    CHECK(s.K(0, 0) == 0.0);
    CHECK(s.P == 0.0);

    Matrix c(2, 2, 1.0);
    c(1, 0) = c(1, 1) = -1.0;
    s = fit_stats(Dataset(c));
    for (double x : s.K.data()) CHECK(x == 1.0);

    CHECK_THROWS_AS(fit_stats(Dataset()), InvalidArgument);
  }

  TEST_CASE("fit_stats is permutation invariant and shift covariant") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    Matrix m(50, 4);
    for (auto& x : m.data()) x = normal(rng);
    const auto base = fit_stats(Dataset(m));

    Matrix perm(50, 4);
    for (std::size_t r = 0; r < 50; ++r)
      for (std::size_t c = 0; c < 4; ++c) perm(r, c) = m(49 - r, c);
    const auto p = fit_stats(Dataset(perm));
    CHECK(max_abs_diff(p.K, base.K) <= 1e-12);

    Matrix shifted = m;
    const double shift[] = {10.0, -3.0, 1e3, 0.5};
    for (std::size_t r = 0; r < 50; ++r)
      for (std::size_t c = 0; c < 4; ++c) shifted(r, c) += shift[c];
    const auto sh = fit_stats(Dataset(shifted));
    for (std::size_t c = 0; c < 4; ++c)
      CHECK(sh.mean[c] == doctest::Approx(base.mean[c] + shift[c]).epsilon(1e-12));
    CHECK(max_abs_diff(sh.K, base.K) <= 1e-12 * (1.0 + max_abs(base.K)) * 1e3);
    CHECK(base.P == doctest::Approx(trace(base.K) / 4.0).epsilon(1e-15));
  }

  TEST_CASE("covariance is PSD on random datasets") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> dim(1, 6);
    for (int trial = 0; trial < 100; ++trial) {
      const auto d = static_cast<std::size_t>(dim(rng));
      Matrix m(3 + trial % 5, d);
      for (auto& x : m.data()) x = normal(rng);
      const auto stats = fit_stats(Dataset(m));
      const Spectrum sp = eigendecompose(stats.K);
      CHECK(sp.eigvals.back() >= -1e-10 * trace(stats.K));
    }
  }

  TEST_CASE("dataset rejects non-finite values and bad slices") {
    Matrix m(1, 2);
    m(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Dataset{m}, InvalidArgument);
    const Dataset d(Matrix(4, 2, 1.0));
    CHECK(d.slice(1, 3).n() == 2);
    CHECK_THROWS_AS(d.slice(3, 5), InvalidArgument);
  }
}

}  // namespace
}  // namespace pba
