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

#include "ltap/align.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "ltap/error.hpp"
#include "ltap/kernels.hpp"

namespace ltap::align {

std::string to_string(Mode mode) { return mode == Mode::Joint ? "joint" : "tp"; }

Mode parse_mode(std::string_view name) {
  if (name == "joint") return Mode::Joint;
  if (name == "tp") return Mode::Tp;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected joint or tp)");
}

std::string to_string(OuterKind kind) { return kind == OuterKind::Adam ? "adam" : "sgd"; }

OuterKind parse_outer(std::string_view name) {
  if (name == "adam") return OuterKind::Adam;
  if (name == "sgd") return OuterKind::Sgd;
  throw ConfigError("unknown outer optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

void TrainerConfig::validate() const {
  if (!(alpha > 0)) throw ConfigError("alpha must be > 0");
  if (!(beta > 0)) throw ConfigError("beta must be > 0");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(lambda >= 0)) throw ConfigError("lambda must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (window < 1) throw ConfigError("window must be >= 1");
  if (negatives < 1) throw ConfigError("negatives must be >= 1");
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (!(head_fraction > 0 && head_fraction < 1)) throw ConfigError("head_fraction must lie in (0, 1)");
}

Model init_model(const TrainerConfig& cfg, std::size_t num_items) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, kStreamInit);
  const auto encoder = enc::make_encoder(cfg.encoder);
  Model m;
  m.encoder = cfg.encoder;
  m.predictor = enc::init_predictor(*encoder, {num_items, cfg.dim, cfg.window}, rng);
  m.discriminator = obj::init_discriminator(cfg.dim, cfg.hidden(), rng);
  return m;
}

double transfer_dot(const ParamSet& a, const ParamSet& b) {
  require_same_layout(a, b, "transfer_dot");
  double s = 0.0;
  auto ib = b.begin();
  for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib) {
    s += kernels::dot(ia->second.data(), ib->second.data(), ia->second.size());
  }
  return s;
}

void sgd_step(ParamSet& params, const ParamSet& grads, double alpha) {
  require_same_layout(params, grads, "sgd_step");
  auto ig = grads.begin();
  for (auto ip = params.begin(); ip != params.end(); ++ip, ++ig) {
    kernels::axpy(-alpha, ig->second.data(), ip->second.data(), ip->second.size());
  }
}

InnerResult inner_step(Model& model, const enc::SequenceEncoder& encoder, const MiniBatch& batch,
                       std::span<const ItemId> negatives, std::size_t per_positive, double alpha,
                       double lambda, bool train_discriminator) {
  if (!(alpha > 0)) throw ConfigError("alpha must be > 0");
  obj::AdversarialLosses losses = obj::adversarial_losses(
      encoder, model.predictor, model.discriminator, batch, negatives, per_positive, lambda);

  ParamSet pred_grad = losses.predictor_tape.backward(losses.predictor_loss);
  Tensor& table_grad = pred_grad.at(enc::kItemTable);
  std::fill_n(table_grad.data(), table_grad.cols(), 0.0);
  ParamSet disc_grad;
  if (train_discriminator) disc_grad = losses.disc_tape.backward(losses.disc_loss);

  InnerResult r;
  r.predictor_loss = losses.predictor_tape.value(losses.predictor_loss).item();
  r.bce = losses.predictor_tape.value(losses.bce).item();
  r.disc_loss = losses.disc_tape.value(losses.disc_loss).item();
  r.disc_accuracy = losses.disc_accuracy;

  sgd_step(model.predictor, pred_grad, alpha);
  if (train_discriminator) sgd_step(model.discriminator, disc_grad, alpha);
  return r;
}

// ---------------------------------------------------------------- outer

OuterOptimizer::OuterOptimizer(OuterKind kind, double beta1, double beta2, double eps)
    : kind_(kind), beta1_(beta1), beta2_(beta2), eps_(eps) {}

ParamSet OuterOptimizer::step(const ParamSet& start, const ParamSet& inner, double beta) {
  require_same_layout(start, inner, "outer_step");
  if (!(beta > 0)) throw ConfigError("beta must be > 0");
  ParamSet out = start;
  if (kind_ == OuterKind::Sgd) {
    auto ii = inner.begin();
    for (auto io = out.begin(); io != out.end(); ++io, ++ii) {
      double* o = io->second.data();
      const double* in = ii->second.data();
      for (std::size_t j = 0; j < io->second.size(); ++j) o[j] = (1.0 - beta) * o[j] + beta * in[j];
    }
    ++steps_;
    return out;
  }

  if (m_.empty()) {
    m_ = start.zeros_like();
    v_ = start.zeros_like();
  }
  require_same_layout(start, m_, "outer_step (optimizer state)");
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(beta1_, t);
  const double c2 = 1.0 - std::pow(beta2_, t);
  auto ii = inner.begin();
  auto im = m_.begin();
  auto iv = v_.begin();
  for (auto io = out.begin(); io != out.end(); ++io, ++ii, ++im, ++iv) {
    double* o = io->second.data();
    const double* in = ii->second.data();
    double* m = im->second.data();
    double* v = iv->second.data();
    for (std::size_t j = 0; j < io->second.size(); ++j) {
      const double g = o[j] - in[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      o[j] -= beta * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
    }
  }
  return out;
}

ParamSet outer_step(const ParamSet& start, const ParamSet& inner, double beta,
                    OuterOptimizer& state) {
  return state.step(start, inner, beta);
}

// ---------------------------------------------------------------- tasks

std::vector<UserTask> build_user_tasks(const std::vector<data::UserRecord>& users,
                                       std::size_t window) {
  std::vector<UserTask> tasks;
  tasks.reserve(users.size());
  for (const auto& u : users) {
    data::UserSequence seq;
    seq.index = u.index;
    seq.items = u.history;
    UserTask t;
    t.user = u.index;
    t.label = u.label;
    t.windows = data::build_tasks(seq, window);
    t.seen = u.seen;
    if (!t.windows.empty()) tasks.push_back(std::move(t));
  }
  if (tasks.empty()) throw DataError("no user has a training window");
  return tasks;
}

StepDraw draw_step(const std::vector<UserTask>& tasks, const TrainerConfig& cfg,
                   std::size_t num_items, std::uint64_t step) {
  if (tasks.empty()) throw DataError("no training tasks");
  Rng rng = make_rng(cfg.seed, kStreamStep, step);
  StepDraw d;
  d.task = uniform_index(rng, tasks.size());
  const UserTask& task = tasks[d.task];
  const std::size_t K = cfg.batch_size;
  const std::size_t n = task.windows.size();

  std::vector<std::size_t> picks(K);
  if (n >= K) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < K; ++i) {
      std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
      picks[i] = idx[i];
    }
  } else {
    for (auto& p : picks) p = uniform_index(rng, n);
  }

  MiniBatch& b = d.batch;
  b.window_len = cfg.window;
  b.label = task.label;
  b.user = task.user;
  b.inputs.reserve(K * cfg.window);
  for (std::size_t p : picks) {
    const TaskWindow& w = task.windows[p];
    b.inputs.insert(b.inputs.end(), w.input.begin(), w.input.end());
    b.targets.push_back(w.target);
  }
  d.negatives = data::sample_negatives(task.seen, num_items, K * cfg.negatives, rng);
  return d;
}

void write_log_header(std::ostream& out) {
  out << "iteration,predictor_loss,disc_loss,disc_accuracy,pseudo_grad_norm\n";
}

void write_log_row(std::ostream& out, const IterationLog& row) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.6f,%.10g\n", row.iteration,
                row.predictor_loss, row.disc_loss, row.disc_accuracy, row.pseudo_grad_norm);
  out << buf;
}

// ---------------------------------------------------------------- trainer

Trainer::Trainer(TrainerConfig cfg, Mode mode, std::vector<UserTask> tasks, std::size_t num_items)
    : cfg_(cfg),
      mode_(mode),
      tasks_(std::move(tasks)),
      num_items_(num_items),
      encoder_(enc::make_encoder(cfg.encoder)),
      model_(init_model(cfg, num_items)),
      outer_pred_(cfg.outer),
      outer_disc_(cfg.outer) {
  if (tasks_.empty()) throw DataError("no training tasks");
}

Trainer::Trainer(TrainerConfig cfg, Mode mode, const data::DatasetBundle& data)
    : Trainer(cfg, mode, build_user_tasks(data.existing, cfg.window), data.num_items()) {}

void Trainer::set_outer(OuterOptimizer predictor, OuterOptimizer discriminator) {
  outer_pred_ = std::move(predictor);
  outer_disc_ = std::move(discriminator);
}

IterationLog Trainer::train_iteration() {
  const Model start = model_;
  const bool joint = mode_ == Mode::Joint;
  const double lambda = joint ? 0.0 : cfg_.lambda;
  IterationLog log;
  log.iteration = iteration_ + 1;
  try {
    for (std::size_t i = 0; i < cfg_.k; ++i) {
      const std::uint64_t step = static_cast<std::uint64_t>(iteration_) * cfg_.k + i;
      const StepDraw d = draw_step(tasks_, cfg_, num_items_, step);
      const InnerResult r = inner_step(model_, *encoder_, d.batch, d.negatives, cfg_.negatives,
                                       cfg_.alpha, lambda, cfg_.train_discriminator);
      log.predictor_loss += r.predictor_loss;
      log.disc_loss += r.disc_loss;
      log.disc_accuracy += r.disc_accuracy;
    }
  } catch (const NonFiniteError& e) {
    model_ = start;
    throw NonFiniteError("iteration " + std::to_string(iteration_ + 1) + " aborted: " + e.what());
  }
  const double k = static_cast<double>(cfg_.k);
  log.predictor_loss /= k;
  log.disc_loss /= k;
  log.disc_accuracy /= k;

  double sq = 0.0;
  auto is = start.predictor.begin();
  for (auto ie = model_.predictor.begin(); ie != model_.predictor.end(); ++ie, ++is) {
    for (std::size_t j = 0; j < ie->second.size(); ++j) {
      const double g = is->second[j] - ie->second[j];
      sq += g * g;
    }
  }
  log.pseudo_grad_norm = std::sqrt(sq);

  if (!joint) {
    model_.predictor = outer_step(start.predictor, model_.predictor, cfg_.beta, outer_pred_);
    if (cfg_.train_discriminator) {
      model_.discriminator =
          outer_step(start.discriminator, model_.discriminator, cfg_.beta, outer_disc_);
    }
  }
  ++iteration_;
  return log;
}

void Trainer::run(const std::function<void(const IterationLog&)>& on_iteration) {
  while (iteration_ < cfg_.iterations) {
    const IterationLog log = train_iteration();
    if (on_iteration) on_iteration(log);
  }
}

}  // namespace ltap::align
