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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pba/parallel.hpp"

namespace pba {
namespace {

TEST_SUITE("parallel") {
  TEST_CASE("every index visited exactly once") {
    for (std::size_t n : {0u, 1u, 7u, 1000u}) {
      std::vector<std::atomic<int>> hits(n);
      parallel_for(n, [&](std::size_t i) { hits[i].fetch_add(1); });
      for (auto& h : hits) CHECK(h.load() == 1);
    }
  }

  TEST_CASE("exceptions propagate") {
    CHECK_THROWS_AS(parallel_for(100,
                                 [](std::size_t i) {
                                   if (i == 42) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
  }

  TEST_CASE("PBA_THREADS bounds the worker count") {
    ::setenv("PBA_THREADS", "3", 1);
    CHECK(thread_count() == 3);
    ::setenv("PBA_THREADS", "0", 1);
    CHECK(thread_count() >= 1);
    ::unsetenv("PBA_THREADS");
  }
}

}  // namespace
}  // namespace pba
