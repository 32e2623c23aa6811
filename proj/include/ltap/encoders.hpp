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

// Next-item prediction model: a sequence encoder that summarizes an L-item
// window into a d-dimensional embedding, followed by a dot-product scoring
// head against the (shared) item embedding table.

#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ltap/autodiff.hpp"
#include "ltap/tensor.hpp"
#include "ltap/types.hpp"

namespace ltap::enc {

enum class EncoderKind { Recurrent, Attention };

std::string to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view name);

/// Name of the (num_items + 1) x d item table. Row 0 is padding and stays zero.
inline constexpr const char* kItemTable = "item_emb";

struct EncoderDims {
  std::size_t num_items = 0;
  std::size_t dim = 0;
  std::size_t window = 0;
};

class SequenceEncoder {
 public:
  virtual ~SequenceEncoder() = default;
  virtual EncoderKind kind() const = 0;
  /// Adds the architecture weights (everything except the item table).
  virtual void init(ParamSet& params, const EncoderDims& dims, std::mt19937_64& rng) const = 0;
  /// `windows` holds K rows of `window_len` item ids; returns a K x d node.
  virtual ad::NodeId encode(ad::Tape& tape, const ad::BoundParams& params,
                            std::span<const ItemId> windows, std::size_t window_len) const = 0;
};

/// Gated recurrent cell run left to right; padding steps carry the hidden
/// state through unchanged, so an all-padding window encodes to zero.
class RecurrentEncoder final : public SequenceEncoder {
 public:
  EncoderKind kind() const override { return EncoderKind::Recurrent; }
  void init(ParamSet& params, const EncoderDims& dims, std::mt19937_64& rng) const override;
  ad::NodeId encode(ad::Tape& tape, const ad::BoundParams& params, std::span<const ItemId> windows,
                    std::size_t window_len) const override;
};

/// One causal self-attention block, single head, read out at the last
/// position. Position embeddings are indexed by distance from the end of the
/// window so the output does not depend on how much left padding precedes
/// the real items. Padding keys get zero attention weight.
class AttentionEncoder final : public SequenceEncoder {
 public:
  EncoderKind kind() const override { return EncoderKind::Attention; }
  void init(ParamSet& params, const EncoderDims& dims, std::mt19937_64& rng) const override;
  ad::NodeId encode(ad::Tape& tape, const ad::BoundParams& params, std::span<const ItemId> windows,
                    std::size_t window_len) const override;

  /// Attention weights of the read-out query over one window (length L).
  static std::vector<double> attention_weights(const ParamSet& params,
                                               std::span<const ItemId> window);
};

std::unique_ptr<SequenceEncoder> make_encoder(EncoderKind kind);

/// Uniform(-1/sqrt(d), 1/sqrt(d)) for every tensor; padding row zeroed.
Tensor uniform_init(Shape shape, std::size_t dim, std::mt19937_64& rng);

/// Item table plus the encoder's architecture weights.
ParamSet init_predictor(const SequenceEncoder& encoder, const EncoderDims& dims,
                        std::mt19937_64& rng);

/// Number of real items implied by the item table.
std::size_t num_items(const ParamSet& predictor);

/// Throws DataError when an index lies outside [0, num_items].
void check_items(std::span<const ItemId> items, std::size_t num_items);

/// Forward-only encoding; returns K x d values.
Tensor encode_values(const SequenceEncoder& encoder, const ParamSet& predictor,
                     std::span<const ItemId> windows, std::size_t window_len);

Tensor encode_recurrent(std::span<const ItemId> window, const ParamSet& predictor);
Tensor encode_attention(std::span<const ItemId> window, const ParamSet& predictor);

/// Scores of `items` for each embedding row: a K x |items| node.
ad::NodeId score(ad::Tape& tape, ad::NodeId embeddings, ad::NodeId item_table,
                 std::span<const ItemId> items);

/// Scores against every real item (columns are items 1..num_items).
Tensor score_all(const Tensor& embeddings, const Tensor& item_table);

/// Single-embedding convenience over a list of items.
std::vector<double> score(const Tensor& embedding, std::span<const ItemId> items,
                          const Tensor& item_table);

}  // namespace ltap::enc
