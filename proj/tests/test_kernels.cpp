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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "ltap/kernels.hpp"
#include "ltap/rng.hpp"

using namespace ltap;
namespace kn = ltap::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, -1, 1);
  return v;
}

// Restores the startup selection when a test ends.
struct LevelGuard {
  kn::SimdLevel saved = kn::active().level;
  ~LevelGuard() { kn::select(saved); }
};

}  // namespace

TEST_CASE("scalar kernels on hand values") {
  const auto& t = kn::scalar_table();
  const double a[] = {1, 2, 3}, b[] = {4, 5, 6};
  CHECK(t.dot(a, b, 3) == 32.0);
  double y[] = {1, 1, 1};
  t.axpy(2.0, a, y, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[2] == 7.0);
  double z[3];
  t.mul(a, b, z, 3);
  CHECK(z[1] == 10.0);
  t.add(a, b, z, 3);
  CHECK(z[2] == 9.0);
  CHECK(t.dot(a, b, 0) == 0.0);
}

TEST_CASE("avx2 kernels agree with scalar kernels") {
  const kn::KernelTable* fast = kn::avx2_table();
  if (fast == nullptr) {
    MESSAGE("AVX2 not available; skipping");
    return;
  }
  const auto& ref = kn::scalar_table();
  Rng rng = make_rng(3, 0);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto x = random_vec(n, rng), y = random_vec(n, rng);
    CHECK(fast->dot(x.data(), y.data(), n) ==
          doctest::Approx(ref.dot(x.data(), y.data(), n)).epsilon(1e-13));
    auto y1 = y, y2 = y;
    ref.axpy(-0.7, x.data(), y1.data(), n);
    fast->axpy(-0.7, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
    std::vector<double> z1(n), z2(n);
    ref.mul(x.data(), y.data(), z1.data(), n);
    fast->mul(x.data(), y.data(), z2.data(), n);
    CHECK(z1 == z2);
    ref.add(x.data(), y.data(), z1.data(), n);
    fast->add(x.data(), y.data(), z2.data(), n);
    CHECK(z1 == z2);
  }
}

TEST_CASE("matrix products match a naive triple loop at every level") {
  LevelGuard guard;
  Rng rng = make_rng(4, 0);
  for (auto level : {kn::SimdLevel::Scalar, kn::SimdLevel::Avx2}) {
    if (!kn::select(level)) continue;
    CAPTURE(kn::active().name);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t m = 1 + uniform_index(rng, 7), k = 1 + uniform_index(rng, 9),
                        n = 1 + uniform_index(rng, 7);
      const auto a = random_vec(m * k, rng), b = random_vec(k * n, rng);
      const auto bt = random_vec(n * k, rng), at = random_vec(k * m, rng);
      std::vector<double> c(m * n), want(m * n);

      kn::gemm(a.data(), b.data(), c.data(), m, k, n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0;
          for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
          want[i * n + j] = s;
        }
      for (std::size_t i = 0; i < m * n; ++i) CHECK(c[i] == doctest::Approx(want[i]).epsilon(1e-12));

      kn::gemm_nt(a.data(), bt.data(), c.data(), m, k, n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0;
          for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * bt[j * k + p];
          CHECK(c[i * n + j] == doctest::Approx(s).epsilon(1e-12));
        }

      std::vector<double> acc(m * n, 1.0);
      kn::gemm_tn_acc(at.data(), b.data(), acc.data(), k, m, n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s = 1.0;
          for (std::size_t p = 0; p < k; ++p) s += at[p * m + i] * b[p * n + j];
          CHECK(acc[i * n + j] == doctest::Approx(s).epsilon(1e-12));
        }

      std::fill(acc.begin(), acc.end(), -2.0);
      kn::gemm_nt_acc(a.data(), bt.data(), acc.data(), m, k, n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s = -2.0;
          for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * bt[j * k + p];
          CHECK(acc[i * n + j] == doctest::Approx(s).epsilon(1e-12));
        }
    }
  }
}

TEST_CASE("level names parse and selection reports availability") {
  LevelGuard guard;
  CHECK(kn::parse_level("scalar") == kn::SimdLevel::Scalar);
  CHECK(kn::parse_level("avx2") == kn::SimdLevel::Avx2);
  CHECK_THROWS(kn::parse_level("sse9"));
  CHECK(kn::select(kn::SimdLevel::Scalar));
  CHECK(kn::active().level == kn::SimdLevel::Scalar);
  CHECK(kn::select(kn::SimdLevel::Avx2) == (kn::avx2_table() != nullptr));
}
