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

// Verification suites with oracles that do not share code paths with the
// quantities they check.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ltap/align.hpp"
#include "ltap/tensor.hpp"

namespace ltap::verify {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  std::string detail;
};

// ---------------------------------------------------------------- gradients

/// Central differences against backward() for every op kind on `shapes`
/// random small inputs each.
SuiteResult op_gradcheck_suite(std::size_t shapes = 100, std::uint64_t seed = 11);

/// BCE through both encoders, and both adversarial objectives, on random
/// instances with L <= 5, d <= 4, |I| <= 10.
SuiteResult model_gradcheck_suite(std::size_t instances = 100, std::uint64_t seed = 12,
                                  double step = 1e-5, double tolerance = 1e-4);

/// The discriminator step moves only the discriminator, by exactly the
/// finite-difference gradient of its loss with embeddings held fixed; the
/// predictor step moves only the predictor, by the finite-difference
/// gradient with discriminator weights held fixed.
SuiteResult stop_gradient_suite(std::size_t instances = 20, std::uint64_t seed = 13);

/// Scalar and AVX2 kernels agree (skipped, and passing, without AVX2).
SuiteResult simd_suite(std::uint64_t seed = 14);

// ---------------------------------------------------------------- surrogate

/// Smooth toy loss on a small parameter vector.
///   quadratic: 0.5 (x - c)^T A (x - c), A symmetric positive definite
///   logcosh:   sum_i a_i log cosh(x_i - c_i)
struct ToyTask {
  enum class Kind { Quadratic, LogCosh } kind = Kind::Quadratic;
  std::vector<double> center;
  std::vector<double> curvature;  // n x n (quadratic) or n (logcosh)

  double value(std::span<const double> x) const;
  std::vector<double> grad(std::span<const double> x) const;
  std::vector<double> hess_vec(std::span<const double> x, std::span<const double> v) const;
};

/// Gradient of
///   E over orderings [ sum_i L_i - coefficient * alpha * sum_{j<i} g_i . g_j ]
/// with exact Hessian-vector products. coefficient = 0.5 is the first-order
/// surrogate of the inner/outer scheme; coefficient = 1 with two tasks is
/// the pairwise alignment objective it approximates.
std::vector<double> surrogate_grad_oracle(std::span<const ToyTask> tasks, std::span<const double> x,
                                          double alpha, double coefficient = 0.5);

/// Same objective, gradient by central differences of its value.
std::vector<double> surrogate_grad_fd(std::span<const ToyTask> tasks, std::span<const double> x,
                                      double alpha, double coefficient = 0.5, double step = 1e-5);

using OuterFn = std::function<ParamSet(const ParamSet& start, const ParamSet& inner, double beta)>;

/// Plain interpolation through align::OuterOptimizer.
OuterFn sgd_outer();

/// (start - E[after one iteration]) / (alpha * beta): every ordering of the
/// tasks as the k = |tasks| inner batches, run through align::sgd_step and
/// `outer`.
std::vector<double> expected_update(std::span<const ToyTask> tasks, std::span<const double> x,
                                    double alpha, double beta, const OuterFn& outer);

struct OrderFit {
  std::vector<double> alphas;
  std::vector<double> residuals;  // relative residual per alpha
  std::vector<double> ratios;     // residual[i] / residual[i + 1]
};

OrderFit order_fit(std::span<const ToyTask> tasks, std::span<const double> x,
                   std::span<const double> alphas, double beta, double coefficient,
                   const OuterFn& outer);

/// Two-parameter quadratic pair used by the surrogate suite.
std::vector<ToyTask> quadratic_pair();
std::vector<ToyTask> logcosh_pair();
std::vector<double> surrogate_point();

/// Expected update vs the pairwise objective: relative residual must fall
/// by 5x-20x per decade of alpha. Expected update vs the first-order
/// surrogate: exact for quadratics (< 1e-8), second order for log-cosh.
SuiteResult surrogate_suite(const OuterFn& outer = sgd_outer());

std::vector<SuiteResult> run_all();
void print_results(std::ostream& out, const std::vector<SuiteResult>& results);

}  // namespace ltap::verify
