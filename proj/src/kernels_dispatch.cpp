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

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

#include "ltap/error.hpp"
#include "ltap/kernels.hpp"

namespace ltap::kernels {

#if defined(LTAP_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif

const KernelTable* avx2_table() {
#if defined(LTAP_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  if (supported) return &avx2_table_unchecked();
#endif
  return nullptr;
}

SimdLevel parse_level(std::string_view name) {
  if (name == "scalar") return SimdLevel::Scalar;
  if (name == "avx2") return SimdLevel::Avx2;
  throw ConfigError("unknown SIMD level '" + std::string(name) + "' (expected scalar|avx2)");
}

namespace {

const KernelTable* initial_table() {
  if (const char* env = std::getenv("LTAP_SIMD"); env != nullptr && *env != '\0') {
    if (parse_level(env) == SimdLevel::Scalar) return &scalar_table();
    if (const KernelTable* t = avx2_table()) return t;
    return &scalar_table();
  }
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(SimdLevel level) {
  const KernelTable* t = level == SimdLevel::Scalar ? &scalar_table() : avx2_table();
  if (t == nullptr) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n) {
  std::fill(c, c + m * n, 0.0);
  gemm_acc(a, b, c, m, k, n);
}

void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n) {
  const KernelTable& t = active();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) t.axpy(a[i * k + p], b + p * n, c + i * n, n);
  }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  const KernelTable& t = active();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = t.dot(a + i * k, b + j * k, k);
  }
}

void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t k, std::size_t m,
                 std::size_t n) {
  const KernelTable& t = active();
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < m; ++i) t.axpy(a[p * m + i], b + p * n, c + i * n, n);
  }
}

void gemm_nt_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n) {
  const KernelTable& t = active();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += t.dot(a + i * k, b + j * k, k);
  }
}

}  // namespace ltap::kernels
