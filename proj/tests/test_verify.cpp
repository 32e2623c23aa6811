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
#include <sstream>

#include "ltap/verify.hpp"

using namespace ltap;
using verify::ToyTask;

namespace {

ToyTask quad1(double center) { return {ToyTask::Kind::Quadratic, {center}, {1.0}}; }

// Outer step in the wrong direction: away from the inner result.
ParamSet flipped_outer(const ParamSet& start, const ParamSet& inner, double beta) {
  ParamSet out = start;
  auto ii = inner.begin();
  for (auto io = out.begin(); io != out.end(); ++io, ++ii)
    for (std::size_t j = 0; j < io->second.size(); ++j)
      io->second[j] += beta * (io->second[j] - ii->second[j]);
  return out;
}

}  // namespace

TEST_CASE("toy tasks: gradients and Hessian products against differences") {
  for (const auto& tasks : {verify::quadratic_pair(), verify::logcosh_pair()}) {
    for (const ToyTask& t : tasks) {
      const std::vector<double> x = {0.2, -0.4};
      const std::vector<double> v = {0.7, 0.3};
      const auto g = t.grad(x);
      const auto hv = t.hess_vec(x, v);
      const double h = 1e-6;
      for (std::size_t i = 0; i < 2; ++i) {
        auto up = x, down = x;
        up[i] += h;
        down[i] -= h;
        CHECK(g[i] == doctest::Approx((t.value(up) - t.value(down)) / (2 * h)).epsilon(1e-8));
        std::vector<double> xp = x, xm = x;
        for (std::size_t j = 0; j < 2; ++j) {
          xp[j] += h * v[j];
          xm[j] -= h * v[j];
        }
        CHECK(hv[i] == doctest::Approx((t.grad(xp)[i] - t.grad(xm)[i]) / (2 * h)).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("surrogate: symmetric tasks give a zero gradient at the midpoint") {
  const std::vector<ToyTask> tasks = {quad1(1.0), quad1(-1.0)};
  const std::vector<double> x = {0.0};
  for (double coef : {0.5, 1.0}) {
    CHECK(verify::surrogate_grad_oracle(tasks, x, 0.1, coef)[0] == doctest::Approx(0.0));
  }
}

TEST_CASE("surrogate: one repeated task shrinks the step") {
  const double c = 0.4, theta = 1.3, alpha = 0.05;
  const std::vector<ToyTask> tasks = {quad1(c), quad1(c)};
  const std::vector<double> x = {theta};
  // 2(theta - c) - 2 alpha (theta - c)
  const double want = 2 * (theta - c) - 2 * alpha * (theta - c);
  CHECK(verify::surrogate_grad_oracle(tasks, x, alpha, 1.0)[0] == doctest::Approx(want).epsilon(1e-14));
  CHECK(verify::surrogate_grad_fd(tasks, x, alpha, 1.0)[0] == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("surrogate: oracle agrees with finite differences on every toy pair") {
  const auto x = verify::surrogate_point();
  for (const auto& tasks : {verify::quadratic_pair(), verify::logcosh_pair()}) {
    for (double coef : {0.5, 1.0}) {
      const auto a = verify::surrogate_grad_oracle(tasks, x, 0.05, coef);
      const auto b = verify::surrogate_grad_fd(tasks, x, 0.05, coef);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("expected update: first-order surrogate is exact on quadratics") {
  const auto tasks = verify::quadratic_pair();
  const auto x = verify::surrogate_point();
  for (double alpha : {1e-1, 1e-2, 1e-3}) {
    const auto u = verify::expected_update(tasks, x, alpha, 0.5, verify::sgd_outer());
    const auto s = verify::surrogate_grad_oracle(tasks, x, alpha, 0.5);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == doctest::Approx(s[i]).epsilon(1e-10));
  }
}

TEST_CASE("expected update: residual to the pairwise objective is first order") {
  const auto tasks = verify::quadratic_pair();
  const auto x = verify::surrogate_point();
  const double alphas[] = {1e-2, 1e-3, 1e-4};
  const auto fit = verify::order_fit(tasks, x, alphas, 0.5, 1.0, verify::sgd_outer());
  REQUIRE(fit.ratios.size() == 2);
  for (double r : fit.ratios) {
    CHECK(r >= 5.0);
    CHECK(r <= 20.0);
  }
  const auto second = verify::order_fit(verify::logcosh_pair(), x, alphas, 0.5, 0.5, verify::sgd_outer());
  for (double r : second.ratios) CHECK(r >= 50.0);
}

TEST_CASE("surrogate suite passes and fails under an injected sign flip") {
  const auto good = verify::surrogate_suite();
  CAPTURE(good.detail);
  CHECK(good.passed);
  const auto bad = verify::surrogate_suite(flipped_outer);
  CAPTURE(bad.detail);
  CHECK(!bad.passed);
}

TEST_CASE("all suites pass and the report lists each with its error") {
  const auto results = verify::run_all();
  CHECK(results.size() >= 5);
  std::ostringstream out;
  verify::print_results(out, results);
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.passed);
    CHECK(std::isfinite(r.max_error));
    CHECK(out.str().find(r.name) != std::string::npos);
  }
}
