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

#include <span>

#include "ltap/autodiff.hpp"
#include "ltap/encoders.hpp"
#include "ltap/rng.hpp"
#include "ltap/tensor.hpp"
#include "ltap/types.hpp"

namespace ltap::obj {

/// Pre-sigmoid discriminator logits are clamped to [-kLogitClamp, kLogitClamp].
inline constexpr double kLogitClamp = 30.0;

/// Two-layer perceptron d -> hidden (tanh) -> 1 (sigmoid). Parameter names
/// start with "disc.".
ParamSet init_discriminator(std::size_t dim, std::size_t hidden, Rng& rng);

/// Mean over windows of
///   -log sigmoid(y_target) - sum_j log(1 - sigmoid(y_neg_j)).
/// `negatives` holds `per_positive` items for each window, window-major.
ad::NodeId bce_from_embeddings(ad::Tape& tape, ad::NodeId embeddings, ad::NodeId item_table,
                               std::span<const ItemId> targets, std::span<const ItemId> negatives,
                               std::size_t per_positive);

/// Encodes the batch and applies bce_from_embeddings.
ad::NodeId bce_loss(ad::Tape& tape, const enc::SequenceEncoder& encoder,
                    const ad::BoundParams& predictor, const MiniBatch& batch,
                    std::span<const ItemId> negatives, std::size_t per_positive);

/// Clamped logits, one per embedding row (K x 1).
ad::NodeId disc_logits(ad::Tape& tape, ad::NodeId embeddings, const ad::BoundParams& disc);

/// Per-row log-likelihood of the correct label (K x 1):
///   R log f_d + (1 - R) log(1 - f_d).  Always <= 0.
ad::NodeId disc_loglik(ad::Tape& tape, ad::NodeId embeddings, const ad::BoundParams& disc,
                       int label);

/// The two alternating objectives built on separate tapes.
///
/// predictor: bce + lambda * mean(loglik); the discriminator weights enter as
///            constants, so minimizing it fools the discriminator.
/// discriminator: -mean(loglik) on the embeddings as constants.
struct AdversarialLosses {
  ad::Tape predictor_tape;
  ad::NodeId predictor_loss;
  ad::NodeId bce;
  ad::Tape disc_tape;
  ad::NodeId disc_loss;
  double mean_loglik = 0.0;
  double disc_accuracy = 0.0;
};

AdversarialLosses adversarial_losses(const enc::SequenceEncoder& encoder, const ParamSet& predictor,
                                     const ParamSet& discriminator, const MiniBatch& batch,
                                     std::span<const ItemId> negatives, std::size_t per_positive,
                                     double lambda);

/// Binds every tensor of `params` as a constant (no gradient flows into it).
ad::BoundParams bind_constants(ad::Tape& tape, const ParamSet& params);

}  // namespace ltap::obj
