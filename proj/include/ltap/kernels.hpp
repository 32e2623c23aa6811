// Copyright 2026 The ltap Authors.
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

#pragma once

// Dense f64 inner loops. Every kernel has a scalar reference implementation
// and, where the CPU supports it, an AVX2+FMA variant. The active table is
// chosen once per process (override with LTAP_SIMD=scalar|avx2) so a run is
// bit-reproducible on a given machine; the variants agree to rounding only.

#include <cstddef>
#include <string_view>

namespace ltap::kernels {

enum class SimdLevel { Scalar, Avx2 };

struct KernelTable {
  SimdLevel level;
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // z[i] = x[i] * y[i]
  void (*mul)(const double* x, const double* y, double* z, std::size_t n);
  // z[i] = x[i] + y[i]
  void (*add)(const double* x, const double* y, double* z, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the AVX2 variant is not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// The table selected for this process.
const KernelTable& active();
/// Forces a level; returns false (and changes nothing) if it is unavailable.
bool select(SimdLevel level);
SimdLevel parse_level(std::string_view name);

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void mul(const double* x, const double* y, double* z, std::size_t n) {
  active().mul(x, y, z, n);
}
inline void add(const double* x, const double* y, double* z, std::size_t n) {
  active().add(x, y, z, n);
}

// Row-major matrix products built on the table above.

/// C(m x n) += A(m x k) * B(k x n).
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n);
/// C(m x n) = A(m x k) * B(k x n); C is overwritten.
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n);
/// C(m x n) = A(m x k) * B(n x k)^T; C is overwritten.
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);
/// C(m x n) += A(k x m)^T * B(k x n).
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t k, std::size_t m,
                 std::size_t n);
/// C(m x n) += A(m x k) * B(n x k)^T.
void gemm_nt_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n);

}  // namespace ltap::kernels
