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

// Transferable-parameter training: k inner SGD steps, each on one randomly
// chosen user's mini-batch, then an outer step that moves the pre-iteration
// parameters toward the inner result. A head/tail discriminator is trained
// alongside and its likelihood enters the predictor loss with weight lambda.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ltap/data.hpp"
#include "ltap/encoders.hpp"
#include "ltap/objectives.hpp"
#include "ltap/tensor.hpp"

namespace ltap::align {

enum class Mode { Joint, Tp };
enum class OuterKind { Adam, Sgd };

std::string to_string(Mode mode);
Mode parse_mode(std::string_view name);
std::string to_string(OuterKind kind);
OuterKind parse_outer(std::string_view name);

struct TrainerConfig {
  double alpha = 0.1;       // inner step size
  double beta = 0.001;      // outer step size
  std::size_t k = 2;        // inner steps per iteration
  double lambda = 0.1;      // adversarial weight
  std::size_t batch_size = 8;
  std::size_t window = 5;
  std::size_t negatives = 3;
  std::size_t dim = 16;
  enc::EncoderKind encoder = enc::EncoderKind::Recurrent;
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  double head_fraction = 0.2;
  std::size_t disc_hidden = 0;  // 0 = dim
  OuterKind outer = OuterKind::Adam;
  bool train_discriminator = true;

  std::size_t hidden() const { return disc_hidden == 0 ? dim : disc_hidden; }
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct Model {
  enc::EncoderKind encoder = enc::EncoderKind::Recurrent;
  ParamSet predictor;
  ParamSet discriminator;

  bool operator==(const Model&) const = default;
};

Model init_model(const TrainerConfig& cfg, std::size_t num_items);

/// Flat dot product of two gradients; > 0 is transfer, < 0 interference.
double transfer_dot(const ParamSet& a, const ParamSet& b);

/// params -= alpha * grads.
void sgd_step(ParamSet& params, const ParamSet& grads, double alpha);

struct InnerResult {
  double predictor_loss = 0.0;
  double bce = 0.0;
  double disc_loss = 0.0;
  double disc_accuracy = 0.0;
};

/// One descent step on the predictor loss for the predictor and one on the
/// discriminator loss for the discriminator, both with step `alpha`. The
/// gradient of the item table's padding row is dropped so that row stays
/// zero. Throws NonFiniteError if a loss or gradient is not finite; `model`
/// is left untouched in that case.
InnerResult inner_step(Model& model, const enc::SequenceEncoder& encoder, const MiniBatch& batch,
                       std::span<const ItemId> negatives, std::size_t per_positive, double alpha,
                       double lambda, bool train_discriminator = true);

/// Outer update on the pseudo-gradient (start - inner).
///
/// Adam: start - beta * mhat / (sqrt(vhat) + eps) with the usual bias
/// correction. Sgd: (1 - beta) * start + beta * inner, which equals
/// start - beta * (start - inner) and is exact at beta = 1.
class OuterOptimizer {
 public:
  explicit OuterOptimizer(OuterKind kind = OuterKind::Adam, double beta1 = 0.9,
                          double beta2 = 0.999, double eps = 1e-8);

  ParamSet step(const ParamSet& start, const ParamSet& inner, double beta);

  OuterKind kind() const { return kind_; }
  std::uint64_t steps() const { return steps_; }

 private:
  OuterKind kind_;
  double beta1_, beta2_, eps_;
  std::uint64_t steps_ = 0;
  ParamSet m_, v_;
};

/// Free-function form; `state` carries the moments.
ParamSet outer_step(const ParamSet& start, const ParamSet& inner, double beta,
                    OuterOptimizer& state);

/// One user's training task.
struct UserTask {
  UserIndex user = 0;
  int label = 0;
  std::vector<TaskWindow> windows;
  std::vector<ItemId> seen;  // sorted
};

std::vector<UserTask> build_user_tasks(const std::vector<data::UserRecord>& users,
                                       std::size_t window);

/// Everything random about one inner step, derived from (seed, step) only.
struct StepDraw {
  std::size_t task = 0;  // index into the task list
  MiniBatch batch;
  std::vector<ItemId> negatives;
};

/// Task chosen uniformly; K windows without replacement when the task has at
/// least K, otherwise with replacement; negatives uniform over unseen items.
StepDraw draw_step(const std::vector<UserTask>& tasks, const TrainerConfig& cfg,
                   std::size_t num_items, std::uint64_t step);

struct IterationLog {
  std::size_t iteration = 0;
  double predictor_loss = 0.0;  // mean over the inner steps
  double disc_loss = 0.0;
  double disc_accuracy = 0.0;
  double pseudo_grad_norm = 0.0;  // |start - inner| over predictor params
};

void write_log_header(std::ostream& out);
void write_log_row(std::ostream& out, const IterationLog& row);

/// Training driver.
///
/// tp:    k inner steps then an outer step on predictor and discriminator.
/// joint: k plain SGD steps on the prediction loss alone (lambda treated as
///        0, no outer step); the discriminator still trains as a monitor.
///        This equals tp with lambda = 0, Sgd outer and beta = 1.
class Trainer {
 public:
  Trainer(TrainerConfig cfg, Mode mode, std::vector<UserTask> tasks, std::size_t num_items);
  Trainer(TrainerConfig cfg, Mode mode, const data::DatasetBundle& data);

  /// One iteration. On a non-finite value the model is restored to the
  /// iteration's start and NonFiniteError is rethrown with context.
  IterationLog train_iteration();
  void run(const std::function<void(const IterationLog&)>& on_iteration = {});

  const Model& model() const { return model_; }
  Model& model() { return model_; }
  const TrainerConfig& config() const { return cfg_; }
  Mode mode() const { return mode_; }
  std::size_t iteration() const { return iteration_; }
  const std::vector<UserTask>& tasks() const { return tasks_; }

  /// Replaces the outer optimizer (verification fixtures).
  void set_outer(OuterOptimizer predictor, OuterOptimizer discriminator);

 private:
  TrainerConfig cfg_;
  Mode mode_;
  std::vector<UserTask> tasks_;
  std::size_t num_items_;
  std::unique_ptr<enc::SequenceEncoder> encoder_;
  Model model_;
  OuterOptimizer outer_pred_;
  OuterOptimizer outer_disc_;
  std::size_t iteration_ = 0;
};

}  // namespace ltap::align
