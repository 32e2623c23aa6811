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

#include "ltap/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ltap/error.hpp"
#include "ltap/kernels.hpp"
#include "ltap/objectives.hpp"

namespace ltap::verify {

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + uniform_index(rng, hi - lo + 1);
}

std::string fmt_error(double e) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", e);
  return buf;
}

// Central-difference gradient of a scalar function of a ParamSet.
ParamSet fd_grad(const std::function<double(const ParamSet&)>& f, const ParamSet& at,
                 double step = 1e-6) {
  ParamSet g = at.zeros_like();
  ParamSet probe = at;
  for (auto& [name, t] : probe) {
    Tensor& out = g.at(name);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = t[i];
      t[i] = orig + step;
      const double up = f(probe);
      t[i] = orig - step;
      const double down = f(probe);
      t[i] = orig;
      out[i] = (up - down) / (2.0 * step);
    }
  }
  return g;
}

}  // namespace

// ---------------------------------------------------------------- op suite

SuiteResult op_gradcheck_suite(std::size_t shapes, std::uint64_t seed) {
  using ad::OpKind;
  using ad::NodeId;
  using ad::Tape;
  SuiteResult res{"op-gradcheck", true, 0.0, ""};
  Rng rng = make_rng(seed, 0);
  const OpKind kinds[] = {OpKind::MatMul, OpKind::MatMulNT, OpKind::Add, OpKind::Sub,
                          OpKind::Mul, OpKind::Scale, OpKind::Sigmoid, OpKind::Tanh,
                          OpKind::Relu, OpKind::Log, OpKind::LogSigmoid, OpKind::Neg,
                          OpKind::Clamp, OpKind::SoftmaxLast, OpKind::Gather, OpKind::Concat,
                          OpKind::SliceRows, OpKind::Mean, OpKind::Sum, OpKind::SumLast};
  std::string worst;
  for (OpKind kind : kinds) {
    for (std::size_t s = 0; s < shapes; ++s) {
      const std::size_t m = pick(rng, 1, 4), n = pick(rng, 1, 4), q = pick(rng, 1, 4);
      ParamSet params;
      Tensor a = random_tensor({m, n}, rng);
      Tensor b = random_tensor({m, n}, rng);
      std::function<NodeId(Tape&, NodeId, NodeId)> build;
      ad::OpAttrs attrs;
      switch (kind) {
        case OpKind::MatMul:
          b = random_tensor({n, q}, rng);
          build = [](Tape& t, NodeId x, NodeId y) { return t.matmul(x, y); };
          break;
        case OpKind::MatMulNT:
          b = random_tensor({q, n}, rng);
          build = [](Tape& t, NodeId x, NodeId y) { return t.matmul_nt(x, y); };
          break;
        case OpKind::Add:
          if (s % 2) b = random_tensor({n}, rng);  // row-broadcast bias
          build = [](Tape& t, NodeId x, NodeId y) { return t.add(x, y); };
          break;
        case OpKind::Sub: build = [](Tape& t, NodeId x, NodeId y) { return t.sub(x, y); }; break;
        case OpKind::Mul: build = [](Tape& t, NodeId x, NodeId y) { return t.mul(x, y); }; break;
        case OpKind::Scale: {
          const double c = uniform(rng, -2, 2);
          build = [c](Tape& t, NodeId x, NodeId) { return t.scale(x, c); };
          break;
        }
        case OpKind::Sigmoid: build = [](Tape& t, NodeId x, NodeId) { return t.sigmoid(x); }; break;
        case OpKind::Tanh: build = [](Tape& t, NodeId x, NodeId) { return t.tanh(x); }; break;
        case OpKind::Relu:
          for (double& v : a.values()) v = (v < 0 ? -1 : 1) * (0.01 + std::abs(v));
          build = [](Tape& t, NodeId x, NodeId) { return t.relu(x); };
          break;
        case OpKind::Log:
          a = random_tensor({m, n}, rng, 0.5, 2.0);
          build = [](Tape& t, NodeId x, NodeId) { return t.log(x); };
          break;
        case OpKind::LogSigmoid:
          a = random_tensor({m, n}, rng, -6, 6);
          build = [](Tape& t, NodeId x, NodeId) { return t.log_sigmoid(x); };
          break;
        case OpKind::Neg: build = [](Tape& t, NodeId x, NodeId) { return t.neg(x); }; break;
        case OpKind::Clamp:
          for (double& v : a.values()) {
            if (std::abs(std::abs(v) - 0.5) < 0.01) v += 0.05;
          }
          build = [](Tape& t, NodeId x, NodeId) { return t.clamp(x, -0.5, 0.5); };
          break;
        case OpKind::SoftmaxLast: {
          std::vector<std::uint8_t> mask;
          if (s % 2) {
            mask.resize(n);
            for (auto& mk : mask) mk = uniform01(rng) < 0.3;
          }
          a = random_tensor({m, n}, rng, -3, 3);
          build = [mask](Tape& t, NodeId x, NodeId) { return t.softmax(x, mask); };
          break;
        }
        case OpKind::Gather: {
          std::vector<std::size_t> rows(pick(rng, 1, 6));
          for (auto& r : rows) r = uniform_index(rng, m);
          build = [rows](Tape& t, NodeId x, NodeId) { return t.gather(x, rows); };
          break;
        }
        case OpKind::Concat: {
          const std::size_t axis = s % 2;
          b = axis == 0 ? random_tensor({q, n}, rng) : random_tensor({m, q}, rng);
          build = [axis](Tape& t, NodeId x, NodeId y) {
            const NodeId parts[] = {x, y};
            return t.concat(parts, axis);
          };
          break;
        }
        case OpKind::SliceRows: {
          const std::size_t start = uniform_index(rng, m);
          const std::size_t count = pick(rng, 1, m - start);
          build = [start, count](Tape& t, NodeId x, NodeId) { return t.slice_rows(x, start, count); };
          break;
        }
        case OpKind::Mean: build = [](Tape& t, NodeId x, NodeId) { return t.mean(x); }; break;
        case OpKind::Sum: build = [](Tape& t, NodeId x, NodeId) { return t.sum(x); }; break;
        case OpKind::SumLast: build = [](Tape& t, NodeId x, NodeId) { return t.sum_last(x); }; break;
        default: break;
      }
      params.set("a", a);
      params.set("b", b);
      // Weight the output by a fixed random tensor so every entry matters.
      Tape shape_probe;
      const NodeId pa = shape_probe.param("a", a), pb = shape_probe.param("b", b);
      const Tensor weights = random_tensor(shape_probe.value(build(shape_probe, pa, pb)).shape(), rng);
      const ad::ScalarFn f = [&](Tape& t, const ParamSet& p) {
        const NodeId x = t.param("a", p.at("a"));
        const NodeId y = t.param("b", p.at("b"));
        return t.sum(t.mul(build(t, x, y), t.constant(weights)));
      };
      const ad::GradcheckReport r = ad::gradcheck(f, params, 1e-5);
      if (r.max_error > res.max_error) {
        res.max_error = r.max_error;
        worst = ad::op_name(kind);
      }
    }
  }
  res.passed = res.max_error < 1e-4;
  res.detail = std::to_string(std::size(kinds)) + " ops x " + std::to_string(shapes) +
               " shapes; worst op " + worst;
  return res;
}

// ---------------------------------------------------------------- model suite

namespace {

struct Instance {
  enc::EncoderKind kind;
  std::size_t window = 0;
  std::size_t per_positive = 0;
  ParamSet predictor;
  ParamSet disc;
  MiniBatch batch;
  std::vector<ItemId> negatives;
};

Instance random_instance(Rng& rng, enc::EncoderKind kind) {
  Instance in;
  in.kind = kind;
  in.window = pick(rng, 1, 5);
  const std::size_t dim = pick(rng, 1, 4);
  const std::size_t items = pick(rng, 2, 10);
  const std::size_t k = pick(rng, 1, 3);
  in.per_positive = pick(rng, 1, 3);
  const auto encoder = enc::make_encoder(kind);
  in.predictor = enc::init_predictor(*encoder, {items, dim, in.window}, rng);
  for (auto& [name, t] : in.predictor) {
    for (double& v : t.values()) v = uniform(rng, -1, 1);
  }
  Tensor& table = in.predictor.at(enc::kItemTable);
  std::fill_n(table.data(), dim, 0.0);
  in.disc = obj::init_discriminator(dim, pick(rng, 1, 4), rng);
  for (auto& [name, t] : in.disc) {
    for (double& v : t.values()) v = uniform(rng, -1, 1);
  }

  in.batch.window_len = in.window;
  in.batch.label = static_cast<int>(uniform_index(rng, 2));
  for (std::size_t w = 0; w < k; ++w) {
    const std::size_t pad = uniform_index(rng, in.window + 1);
    for (std::size_t j = 0; j < in.window; ++j) {
      in.batch.inputs.push_back(j < pad ? kPadding : static_cast<ItemId>(pick(rng, 1, items)));
    }
    in.batch.targets.push_back(static_cast<ItemId>(pick(rng, 1, items)));
  }
  for (std::size_t j = 0; j < k * in.per_positive; ++j) {
    in.negatives.push_back(static_cast<ItemId>(pick(rng, 1, items)));
  }
  return in;
}

}  // namespace

SuiteResult model_gradcheck_suite(std::size_t instances, std::uint64_t seed, double step,
                                  double tolerance) {
  SuiteResult res{"model-gradcheck", true, 0.0, ""};
  Rng rng = make_rng(seed, 0);
  double worst[4] = {0, 0, 0, 0};  // gru bce, attention bce, predictor adversarial, discriminator
  for (std::size_t i = 0; i < instances; ++i) {
    for (enc::EncoderKind kind : {enc::EncoderKind::Recurrent, enc::EncoderKind::Attention}) {
      const Instance in = random_instance(rng, kind);
      const auto encoder = enc::make_encoder(kind);

      const ad::ScalarFn bce = [&](ad::Tape& t, const ParamSet& p) {
        const ad::BoundParams bound(t, p);
        return obj::bce_loss(t, *encoder, bound, in.batch, in.negatives, in.per_positive);
      };
      const double lambda = 0.5;
      const ad::ScalarFn adversarial = [&](ad::Tape& t, const ParamSet& p) {
        const ad::BoundParams bound(t, p);
        const ad::NodeId e = encoder->encode(t, bound, in.batch.inputs, in.window);
        const ad::NodeId loss = obj::bce_from_embeddings(t, e, bound[enc::kItemTable],
                                                         in.batch.targets, in.negatives,
                                                         in.per_positive);
        const ad::BoundParams disc = obj::bind_constants(t, in.disc);
        const ad::NodeId ll = t.mean(obj::disc_loglik(t, e, disc, in.batch.label));
        return t.add(loss, t.scale(ll, lambda));
      };
      const Tensor emb = enc::encode_values(*encoder, in.predictor, in.batch.inputs, in.window);
      const ad::ScalarFn disc_loss = [&](ad::Tape& t, const ParamSet& p) {
        const ad::BoundParams bound(t, p);
        return t.neg(t.mean(obj::disc_loglik(t, t.constant(emb), bound, in.batch.label)));
      };

      const std::size_t slot = kind == enc::EncoderKind::Recurrent ? 0 : 1;
      worst[slot] = std::max(worst[slot], ad::gradcheck(bce, in.predictor, step).max_error);
      worst[2] = std::max(worst[2], ad::gradcheck(adversarial, in.predictor, step).max_error);
      worst[3] = std::max(worst[3], ad::gradcheck(disc_loss, in.disc, step).max_error);
    }
  }
  res.max_error = *std::max_element(std::begin(worst), std::end(worst));
  res.passed = res.max_error < tolerance;
  res.detail = std::to_string(instances) + " instances per encoder; gru-bce " + fmt_error(worst[0]) +
               ", attention-bce " + fmt_error(worst[1]) + ", predictor-adversarial " +
               fmt_error(worst[2]) + ", discriminator " + fmt_error(worst[3]);
  return res;
}

// ---------------------------------------------------------------- stop gradient

SuiteResult stop_gradient_suite(std::size_t instances, std::uint64_t seed) {
  SuiteResult res{"stop-gradient", true, 0.0, ""};
  Rng rng = make_rng(seed, 0);
  const double alpha = 0.1, lambda = 0.7;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto kind = i % 2 ? enc::EncoderKind::Attention : enc::EncoderKind::Recurrent;
    const Instance in = random_instance(rng, kind);
    const auto encoder = enc::make_encoder(kind);

    align::Model model{kind, in.predictor, in.disc};
    align::inner_step(model, *encoder, in.batch, in.negatives, in.per_positive, alpha, lambda);

    // Predictor objective with the discriminator frozen, evaluated by value only.
    const auto pred_value = [&](const ParamSet& p) {
      ad::Tape t;
      const ad::BoundParams bound(t, p);
      const ad::NodeId e = encoder->encode(t, bound, in.batch.inputs, in.window);
      const ad::NodeId loss = obj::bce_from_embeddings(t, e, bound[enc::kItemTable],
                                                       in.batch.targets, in.negatives,
                                                       in.per_positive);
      const ad::BoundParams disc = obj::bind_constants(t, in.disc);
      const double ll = t.value(t.mean(obj::disc_loglik(t, e, disc, in.batch.label))).item();
      return t.value(loss).item() + lambda * ll;
    };
    const Tensor emb = enc::encode_values(*encoder, in.predictor, in.batch.inputs, in.window);
    const auto disc_value = [&](const ParamSet& p) {
      ad::Tape t;
      const ad::BoundParams bound = obj::bind_constants(t, p);
      return -t.value(t.mean(obj::disc_loglik(t, t.constant(emb), bound, in.batch.label))).item();
    };

    ParamSet expect_pred = in.predictor;
    ParamSet g = fd_grad(pred_value, in.predictor);
    Tensor& gt = g.at(enc::kItemTable);
    std::fill_n(gt.data(), gt.cols(), 0.0);
    align::sgd_step(expect_pred, g, alpha);
    ParamSet expect_disc = in.disc;
    align::sgd_step(expect_disc, fd_grad(disc_value, in.disc), alpha);

    auto compare = [&](const ParamSet& got, const ParamSet& want) {
      auto iw = want.begin();
      for (auto ig = got.begin(); ig != got.end(); ++ig, ++iw) {
        for (std::size_t j = 0; j < ig->second.size(); ++j) {
          const double step = std::abs(iw->second[j] - ig->second[j]) / alpha;
          res.max_error = std::max(res.max_error, step);
        }
      }
    };
    compare(model.predictor, expect_pred);
    compare(model.discriminator, expect_disc);
  }
  res.passed = res.max_error < 1e-6;
  res.detail = std::to_string(instances) +
               " instances; max |update - finite-difference update| / alpha";
  return res;
}

// ---------------------------------------------------------------- simd

SuiteResult simd_suite(std::uint64_t seed) {
  SuiteResult res{"simd-equivalence", true, 0.0, ""};
  const kernels::KernelTable* fast = kernels::avx2_table();
  if (fast == nullptr) {
    res.detail = "AVX2 unavailable; skipped";
    return res;
  }
  const kernels::KernelTable& ref = kernels::scalar_table();
  Rng rng = make_rng(seed, 0);
  for (std::size_t n = 0; n <= 67; ++n) {
    std::vector<double> x(n), y(n);
    for (double& v : x) v = uniform(rng, -2, 2);
    for (double& v : y) v = uniform(rng, -2, 2);
    const double d_ref = ref.dot(x.data(), y.data(), n);
    const double d_fast = fast->dot(x.data(), y.data(), n);
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
    res.max_error = std::max(res.max_error, std::abs(d_ref - d_fast) / scale);

    std::vector<double> a = y, b = y;
    ref.axpy(0.37, x.data(), a.data(), n);
    fast->axpy(0.37, x.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) res.max_error = std::max(res.max_error, std::abs(a[i] - b[i]));
    std::vector<double> p(n), q(n);
    ref.mul(x.data(), y.data(), p.data(), n);
    fast->mul(x.data(), y.data(), q.data(), n);
    for (std::size_t i = 0; i < n; ++i) res.max_error = std::max(res.max_error, std::abs(p[i] - q[i]));
    ref.add(x.data(), y.data(), p.data(), n);
    fast->add(x.data(), y.data(), q.data(), n);
    for (std::size_t i = 0; i < n; ++i) res.max_error = std::max(res.max_error, std::abs(p[i] - q[i]));
  }
  res.passed = res.max_error < 1e-13;
  res.detail = "dot/axpy/mul/add, lengths 0..67";
  return res;
}

// ---------------------------------------------------------------- toy tasks

double ToyTask::value(std::span<const double> x) const {
  const std::size_t n = center.size();
  double v = 0.0;
  if (kind == Kind::Quadratic) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        v += 0.5 * (x[i] - center[i]) * curvature[i * n + j] * (x[j] - center[j]);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) v += curvature[i] * std::log(std::cosh(x[i] - center[i]));
  }
  return v;
}

std::vector<double> ToyTask::grad(std::span<const double> x) const {
  const std::size_t n = center.size();
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (kind == Kind::Quadratic) {
      for (std::size_t j = 0; j < n; ++j) g[i] += curvature[i * n + j] * (x[j] - center[j]);
    } else {
      g[i] = curvature[i] * std::tanh(x[i] - center[i]);
    }
  }
  return g;
}

std::vector<double> ToyTask::hess_vec(std::span<const double> x, std::span<const double> v) const {
  const std::size_t n = center.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (kind == Kind::Quadratic) {
      for (std::size_t j = 0; j < n; ++j) out[i] += curvature[i * n + j] * v[j];
    } else {
      const double t = std::tanh(x[i] - center[i]);
      out[i] = curvature[i] * (1.0 - t * t) * v[i];
    }
  }
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> orderings(std::size_t k) {
  std::vector<std::size_t> p(k);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> all;
  do {
    all.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return all;
}

double surrogate_value(std::span<const ToyTask> tasks, std::span<const double> x, double alpha,
                       double coefficient) {
  const auto orders = orderings(tasks.size());
  std::vector<std::vector<double>> g;
  for (const auto& t : tasks) g.push_back(t.grad(x));
  double total = 0.0;
  for (const auto& order : orders) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      total += tasks[order[i]].value(x);
      for (std::size_t j = 0; j < i; ++j) {
        const auto& gi = g[order[i]];
        const auto& gj = g[order[j]];
        total -= coefficient * alpha * std::inner_product(gi.begin(), gi.end(), gj.begin(), 0.0);
      }
    }
  }
  return total / static_cast<double>(orders.size());
}

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

std::vector<double> surrogate_grad_oracle(std::span<const ToyTask> tasks, std::span<const double> x,
                                          double alpha, double coefficient) {
  const std::size_t n = x.size();
  const auto orders = orderings(tasks.size());
  std::vector<std::vector<double>> g;
  for (const auto& t : tasks) g.push_back(t.grad(x));
  std::vector<double> out(n, 0.0);
  for (const auto& order : orders) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t ti = order[i];
      for (std::size_t d = 0; d < n; ++d) out[d] += g[ti][d];
      for (std::size_t j = 0; j < i; ++j) {
        const std::size_t tj = order[j];
        // d/dx (g_i . g_j) = H_i g_j + H_j g_i
        const auto a = tasks[ti].hess_vec(x, g[tj]);
        const auto b = tasks[tj].hess_vec(x, g[ti]);
        for (std::size_t d = 0; d < n; ++d) out[d] -= coefficient * alpha * (a[d] + b[d]);
      }
    }
  }
  for (double& v : out) v /= static_cast<double>(orders.size());
  return out;
}

std::vector<double> surrogate_grad_fd(std::span<const ToyTask> tasks, std::span<const double> x,
                                      double alpha, double coefficient, double step) {
  std::vector<double> probe(x.begin(), x.end()), out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    probe[d] = x[d] + step;
    const double up = surrogate_value(tasks, probe, alpha, coefficient);
    probe[d] = x[d] - step;
    const double down = surrogate_value(tasks, probe, alpha, coefficient);
    probe[d] = x[d];
    out[d] = (up - down) / (2.0 * step);
  }
  return out;
}

OuterFn sgd_outer() {
  return [](const ParamSet& start, const ParamSet& inner, double beta) {
    align::OuterOptimizer opt(align::OuterKind::Sgd);
    return align::outer_step(start, inner, beta, opt);
  };
}

std::vector<double> expected_update(std::span<const ToyTask> tasks, std::span<const double> x,
                                    double alpha, double beta, const OuterFn& outer) {
  const std::size_t n = x.size();
  const auto orders = orderings(tasks.size());
  ParamSet start;
  start.set("theta", Tensor({n}, std::vector<double>(x.begin(), x.end())));
  std::vector<double> out(n, 0.0);
  for (const auto& order : orders) {
    ParamSet p = start;
    for (std::size_t t : order) {
      ParamSet g;
      const Tensor& cur = p.at("theta");
      g.set("theta", Tensor({n}, tasks[t].grad(cur.values())));
      align::sgd_step(p, g, alpha);
    }
    const ParamSet next = outer(start, p, beta);
    for (std::size_t d = 0; d < n; ++d) out[d] += x[d] - next.at("theta")[d];
  }
  for (double& v : out) v /= alpha * beta * static_cast<double>(orders.size());
  return out;
}

OrderFit order_fit(std::span<const ToyTask> tasks, std::span<const double> x,
                   std::span<const double> alphas, double beta, double coefficient,
                   const OuterFn& outer) {
  OrderFit fit;
  for (double a : alphas) {
    const auto u = expected_update(tasks, x, a, beta, outer);
    const auto g = surrogate_grad_oracle(tasks, x, a, coefficient);
    std::vector<double> diff(u.size());
    for (std::size_t d = 0; d < u.size(); ++d) diff[d] = u[d] - g[d];
    fit.alphas.push_back(a);
    fit.residuals.push_back(norm(diff) / norm(g));
  }
  for (std::size_t i = 0; i + 1 < fit.residuals.size(); ++i) {
    fit.ratios.push_back(fit.residuals[i] / fit.residuals[i + 1]);
  }
  return fit;
}

std::vector<ToyTask> quadratic_pair() {
  return {
      {ToyTask::Kind::Quadratic, {1.0, -0.5}, {2.0, 0.5, 0.5, 1.0}},
      {ToyTask::Kind::Quadratic, {-1.0, 2.0}, {1.0, -0.3, -0.3, 3.0}},
  };
}

std::vector<ToyTask> logcosh_pair() {
  return {
      {ToyTask::Kind::LogCosh, {1.0, -0.5}, {1.5, 0.8}},
      {ToyTask::Kind::LogCosh, {-1.0, 1.0}, {0.7, 2.0}},
  };
}

std::vector<double> surrogate_point() { return {0.3, 0.7}; }

SuiteResult surrogate_suite(const OuterFn& outer) {
  SuiteResult res{"surrogate-order", true, 0.0, ""};
  const double alphas[] = {1e-2, 1e-3, 1e-4};
  const double beta = 0.5;
  const auto x = surrogate_point();
  const auto quad = quadratic_pair();
  const auto pairwise = order_fit(quad, x, alphas, beta, 1.0, outer);
  const auto first_order = order_fit(quad, x, alphas, beta, 0.5, outer);
  const auto smooth = order_fit(logcosh_pair(), x, alphas, beta, 0.5, outer);

  bool ok = true;
  for (double r : pairwise.ratios) ok = ok && r >= 5.0 && r <= 20.0;
  const double exact = *std::max_element(first_order.residuals.begin(), first_order.residuals.end());
  ok = ok && exact < 1e-8;
  for (double r : smooth.ratios) ok = ok && r >= 50.0;
  res.passed = ok;
  res.max_error = exact;

  std::ostringstream os;
  os.precision(4);
  os << "pairwise residual";
  for (double r : pairwise.residuals) os << ' ' << r;
  os << " (ratios";
  for (double r : pairwise.ratios) os << ' ' << r;
  os << "); first-order surrogate residual " << exact << " (quadratic), ratios";
  for (double r : smooth.ratios) os << ' ' << r;
  os << " (log-cosh)";
  res.detail = os.str();
  return res;
}

std::vector<SuiteResult> run_all() {
  return {op_gradcheck_suite(), model_gradcheck_suite(), stop_gradient_suite(), surrogate_suite(),
          simd_suite()};
}

void print_results(std::ostream& out, const std::vector<SuiteResult>& results) {
  char buf[96];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%-4s %-18s max_error=%.3e  ", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.max_error);
    out << buf << r.detail << '\n';
  }
}

}  // namespace ltap::verify
