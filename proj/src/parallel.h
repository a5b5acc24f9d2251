// Copyright 2026 The fairmt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRMT_SRC_PARALLEL_H_
#define FAIRMT_SRC_PARALLEL_H_

#include <exception>
#include <vector>

namespace fairmt::internal {

// Runs fn(i) for i in [0, n) across OpenMP threads. Exceptions cannot leave
// a parallel region, so each one is captured and the lowest-index exception
// is rethrown afterwards.
template <typename Fn>
void ParallelFor(int n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace fairmt::internal

#endif  // FAIRMT_SRC_PARALLEL_H_
