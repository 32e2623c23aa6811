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

#include "ltap/objectives.hpp"

#include "ltap/error.hpp"

namespace ltap::obj {

ParamSet init_discriminator(std::size_t dim, std::size_t hidden, Rng& rng) {
  if (dim == 0 || hidden == 0) throw ConfigError("discriminator sizes must be positive");
  ParamSet p;
  p.set("disc.w1", enc::uniform_init({dim, hidden}, dim, rng));
  p.set("disc.b1", enc::uniform_init({hidden}, dim, rng));
  p.set("disc.w2", enc::uniform_init({hidden, 1}, hidden, rng));
  p.set("disc.b2", enc::uniform_init({1}, hidden, rng));
  return p;
}

ad::BoundParams bind_constants(ad::Tape& tape, const ParamSet& params) {
  ad::BoundParams bound;
  for (const auto& [name, t] : params) bound.add(name, tape.constant(t));
  return bound;
}

ad::NodeId bce_from_embeddings(ad::Tape& tape, ad::NodeId embeddings, ad::NodeId item_table,
                               std::span<const ItemId> targets, std::span<const ItemId> negatives,
                               std::size_t per_positive) {
  const std::size_t k = targets.size();
  if (k == 0) throw ShapeError("bce: empty batch");
  if (per_positive == 0) throw ConfigError("bce: need at least one negative per positive");
  if (negatives.size() != k * per_positive) {
    throw ShapeError("bce: expected " + std::to_string(k * per_positive) + " negatives, got " +
                     std::to_string(negatives.size()));
  }
  if (tape.value(embeddings).rows() != k) throw ShapeError("bce: embedding rows != batch size");
  const std::size_t items = tape.value(item_table).rows() - 1;
  enc::check_items(targets, items);
  enc::check_items(negatives, items);
  for (ItemId t : targets) {
    if (t == kPadding) throw DataError("bce: padding item used as target");
  }

  const ad::NodeId pos_rows = tape.gather(item_table, {targets.begin(), targets.end()});
  const ad::NodeId pos = tape.sum_last(tape.mul(embeddings, pos_rows));

  std::vector<std::size_t> owner(k * per_positive);
  for (std::size_t i = 0; i < owner.size(); ++i) owner[i] = i / per_positive;
  const ad::NodeId repeated = per_positive == 1 ? embeddings : tape.gather(embeddings, owner);
  const ad::NodeId neg_rows = tape.gather(item_table, {negatives.begin(), negatives.end()});
  const ad::NodeId neg = tape.sum_last(tape.mul(repeated, neg_rows));

  // log(1 - sigmoid(y)) = log sigmoid(-y)
  const ad::NodeId total =
      tape.add(tape.sum(tape.log_sigmoid(pos)), tape.sum(tape.log_sigmoid(tape.neg(neg))));
  return tape.scale(total, -1.0 / static_cast<double>(k));
}

ad::NodeId bce_loss(ad::Tape& tape, const enc::SequenceEncoder& encoder,
                    const ad::BoundParams& predictor, const MiniBatch& batch,
                    std::span<const ItemId> negatives, std::size_t per_positive) {
  const ad::NodeId e = encoder.encode(tape, predictor, batch.inputs, batch.window_len);
  return bce_from_embeddings(tape, e, predictor[enc::kItemTable], batch.targets, negatives,
                             per_positive);
}

ad::NodeId disc_logits(ad::Tape& tape, ad::NodeId embeddings, const ad::BoundParams& disc) {
  const ad::NodeId hidden =
      tape.tanh(tape.add(tape.matmul(embeddings, disc["disc.w1"]), disc["disc.b1"]));
  const ad::NodeId logit = tape.add(tape.matmul(hidden, disc["disc.w2"]), disc["disc.b2"]);
  return tape.clamp(logit, -kLogitClamp, kLogitClamp);
}

ad::NodeId disc_loglik(ad::Tape& tape, ad::NodeId embeddings, const ad::BoundParams& disc,
                       int label) {
  if (label != 0 && label != 1) throw ConfigError("head/tail label must be 0 or 1");
  const ad::NodeId z = disc_logits(tape, embeddings, disc);
  // log f_d = log sigmoid(z); log(1 - f_d) = log sigmoid(-z)
  return label == 1 ? tape.log_sigmoid(z) : tape.log_sigmoid(tape.neg(z));
}

AdversarialLosses adversarial_losses(const enc::SequenceEncoder& encoder, const ParamSet& predictor,
                                     const ParamSet& discriminator, const MiniBatch& batch,
                                     std::span<const ItemId> negatives, std::size_t per_positive,
                                     double lambda) {
  if (!(lambda >= 0)) throw ConfigError("lambda must be non-negative");
  AdversarialLosses out;

  ad::Tape& pt = out.predictor_tape;
  const ad::BoundParams theta(pt, predictor);
  const ad::NodeId e = encoder.encode(pt, theta, batch.inputs, batch.window_len);
  out.bce = bce_from_embeddings(pt, e, theta[enc::kItemTable], batch.targets, negatives,
                                per_positive);
  if (lambda > 0) {
    const ad::BoundParams frozen_disc = bind_constants(pt, discriminator);
    const ad::NodeId adv = pt.mean(disc_loglik(pt, e, frozen_disc, batch.label));
    out.predictor_loss = pt.add(out.bce, pt.scale(adv, lambda));
  } else {
    out.predictor_loss = out.bce;
  }

  ad::Tape& dt = out.disc_tape;
  const ad::BoundParams disc(dt, discriminator);
  const ad::NodeId frozen_e = dt.constant(pt.value(e));
  const ad::NodeId logits = disc_logits(dt, frozen_e, disc);
  const ad::NodeId loglik = batch.label == 1 ? dt.log_sigmoid(logits)
                                             : dt.log_sigmoid(dt.neg(logits));
  const ad::NodeId mean_ll = dt.mean(loglik);
  out.disc_loss = dt.neg(mean_ll);
  out.mean_loglik = dt.value(mean_ll).item();

  const Tensor& z = dt.value(logits);
  std::size_t correct = 0;
  for (double v : z.values()) correct += (v > 0 ? 1 : 0) == batch.label;
  out.disc_accuracy = static_cast<double>(correct) / static_cast<double>(z.size());
  return out;
}

}  // namespace ltap::obj
