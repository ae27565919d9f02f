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

#ifndef PBA_PARALLEL_HPP_
#define PBA_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace pba {

// Worker count from PBA_THREADS (0 or unset = hardware concurrency).
std::size_t thread_count();

// Runs body(i) for i in [0, n) over contiguous chunks. Each index is visited
// exactly once; callers write results into pre-sized slots, so output order
// never depends on scheduling. The first exception thrown by any worker is
// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pba

#endif  // PBA_PARALLEL_HPP_
