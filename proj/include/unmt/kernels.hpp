// Copyright 2026 The unmt-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense kernels in two flavours. The serial versions are the reference used
// on every tape; the OpenMP versions split output rows across threads and
// must produce bit-identical results (each output element is accumulated by
// exactly one thread in the same order as the serial loop).

#pragma once

#include <cstddef>
#include <cstdint>

#include "unmt/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace unmt::kernels {

enum class Exec : std::uint8_t { Serial, Parallel };

namespace serial {
/// c += a * b
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c);
/// c += a^T * b
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c);
/// c += a * b^T
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c);
}  // namespace serial

namespace omp {
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c);
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c);
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c);
}  // namespace omp

inline void gemm_nn(Exec exec, const Tensor& a, const Tensor& b, Tensor& c) {
  exec == Exec::Serial ? serial::gemm_nn(a, b, c) : omp::gemm_nn(a, b, c);
}

/// Runs body(i) for i in [0, n). With Exec::Parallel the iterations are
/// distributed over OpenMP threads; callers write results into slot i so the
/// outcome does not depend on scheduling.
template <class Body>
void for_each_index(Exec exec, std::size_t n, Body&& body) {
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace unmt::kernels
