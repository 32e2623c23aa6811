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

#include "ltap/encoders.hpp"

#include <cmath>

#include "ltap/error.hpp"
#include "ltap/kernels.hpp"
#include "ltap/rng.hpp"

namespace ltap::enc {

std::string to_string(EncoderKind kind) {
  return kind == EncoderKind::Recurrent ? "gru" : "attention";
}

EncoderKind parse_encoder_kind(std::string_view name) {
  if (name == "gru" || name == "recurrent") return EncoderKind::Recurrent;
  if (name == "attention" || name == "sasr") return EncoderKind::Attention;
  throw ConfigError("unknown encoder '" + std::string(name) + "' (expected gru|attention)");
}

Tensor uniform_init(Shape shape, std::size_t dim, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& v : t.values()) v = uniform(rng, -bound, bound);
  return t;
}

std::size_t num_items(const ParamSet& predictor) {
  const Tensor& table = predictor.at(kItemTable);
  if (table.rank() != 2 || table.rows() == 0) throw ShapeError("malformed item table");
  return table.rows() - 1;
}

void check_items(std::span<const ItemId> items, std::size_t num_items) {
  for (ItemId it : items) {
    if (it > num_items) {
      throw DataError("item index " + std::to_string(it) + " outside vocabulary [0, " +
                      std::to_string(num_items) + "]");
    }
  }
}

ParamSet init_predictor(const SequenceEncoder& encoder, const EncoderDims& dims, Rng& rng) {
  if (dims.dim == 0 || dims.window == 0 || dims.num_items == 0) {
    throw ConfigError("encoder dimensions must be positive");
  }
  ParamSet p;
  Tensor table = uniform_init({dims.num_items + 1, dims.dim}, dims.dim, rng);
  std::fill_n(table.data(), dims.dim, 0.0);
  p.set(kItemTable, std::move(table));
  encoder.init(p, dims, rng);
  return p;
}

// ---------------------------------------------------------------- recurrent

namespace {

constexpr const char* kGates[] = {"z", "r", "n"};

std::size_t embedding_dim(const ad::Tape& tape, const ad::BoundParams& params) {
  return tape.value(params[kItemTable]).cols();
}

}  // namespace

void RecurrentEncoder::init(ParamSet& params, const EncoderDims& dims, Rng& rng) const {
  const std::size_t d = dims.dim;
  for (const char* g : kGates) {
    params.set(std::string("gru.w_") + g, uniform_init({d, d}, d, rng));
    params.set(std::string("gru.u_") + g, uniform_init({d, d}, d, rng));
    params.set(std::string("gru.b_") + g, uniform_init({d}, d, rng));
  }
}

ad::NodeId RecurrentEncoder::encode(ad::Tape& tape, const ad::BoundParams& params,
                                    std::span<const ItemId> windows, std::size_t window_len) const {
  if (window_len == 0 || windows.size() % window_len != 0) {
    throw ShapeError("recurrent encoder: window buffer is not a multiple of L");
  }
  const std::size_t batch = windows.size() / window_len;
  const std::size_t d = embedding_dim(tape, params);
  check_items(windows, tape.value(params[kItemTable]).rows() - 1);

  const ad::NodeId table = params[kItemTable];
  ad::NodeId h = tape.constant(Tensor({batch, d}));
  for (std::size_t t = 0; t < window_len; ++t) {
    std::vector<std::size_t> rows(batch);
    std::size_t live = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      rows[b] = windows[b * window_len + t];
      live += rows[b] != kPadding;
    }
    if (live == 0) continue;  // identity transition for every row

    const ad::NodeId x = tape.gather(table, rows);
    auto gate_pre = [&](const char* g, ad::NodeId hidden) {
      const std::string s(g);
      const ad::NodeId xw = tape.matmul(x, params["gru.w_" + s]);
      const ad::NodeId hu = tape.matmul(hidden, params["gru.u_" + s]);
      return tape.add(tape.add(xw, hu), params["gru.b_" + s]);
    };
    const ad::NodeId z = tape.sigmoid(gate_pre("z", h));
    const ad::NodeId r = tape.sigmoid(gate_pre("r", h));
    const ad::NodeId n = tape.tanh(gate_pre("n", tape.mul(r, h)));
    // h' = (1 - z) * n + z * h = n + z * (h - n)
    const ad::NodeId h_new = tape.add(n, tape.mul(z, tape.sub(h, n)));

    if (live == batch) {
      h = h_new;
    } else {
      Tensor keep({batch, d});
      Tensor hold({batch, d});
      for (std::size_t b = 0; b < batch; ++b) {
        const double m = rows[b] != kPadding ? 1.0 : 0.0;
        std::fill_n(keep.data() + b * d, d, m);
        std::fill_n(hold.data() + b * d, d, 1.0 - m);
      }
      h = tape.add(tape.mul(tape.constant(std::move(keep)), h_new),
                   tape.mul(tape.constant(std::move(hold)), h));
    }
  }
  return h;
}

// ---------------------------------------------------------------- attention

void AttentionEncoder::init(ParamSet& params, const EncoderDims& dims, Rng& rng) const {
  const std::size_t d = dims.dim;
  params.set("att.w_q", uniform_init({d, d}, d, rng));
  params.set("att.w_k", uniform_init({d, d}, d, rng));
  params.set("att.w_v", uniform_init({d, d}, d, rng));
  params.set("att.pos", uniform_init({dims.window, d}, d, rng));
  params.set("att.ff_w1", uniform_init({d, d}, d, rng));
  params.set("att.ff_b1", uniform_init({d}, d, rng));
  params.set("att.ff_w2", uniform_init({d, d}, d, rng));
  params.set("att.ff_b2", uniform_init({d}, d, rng));
}

namespace {

struct AttentionParts {
  ad::NodeId weights;  // 1 x L
  ad::NodeId output;   // 1 x d
};

AttentionParts attend(ad::Tape& tape, const ad::BoundParams& params,
                      std::span<const ItemId> window) {
  const std::size_t len = window.size();
  const ad::NodeId pos_table = params["att.pos"];
  if (tape.value(pos_table).rows() < len) {
    throw ShapeError("attention encoder: window of " + std::to_string(len) +
                     " exceeds position table of " +
                     std::to_string(tape.value(pos_table).rows()));
  }
  const std::size_t d = tape.value(pos_table).cols();

  std::vector<std::size_t> items(window.begin(), window.end());
  std::vector<std::size_t> positions(len);
  std::vector<std::uint8_t> mask(len);
  for (std::size_t p = 0; p < len; ++p) {
    positions[p] = len - 1 - p;
    mask[p] = window[p] == kPadding;
  }
  const ad::NodeId x =
      tape.add(tape.gather(params[kItemTable], items), tape.gather(pos_table, positions));
  const ad::NodeId last = tape.slice_rows(x, len - 1, 1);

  const ad::NodeId q = tape.matmul(last, params["att.w_q"]);
  const ad::NodeId k = tape.matmul(x, params["att.w_k"]);
  const ad::NodeId v = tape.matmul(x, params["att.w_v"]);
  const ad::NodeId logits = tape.scale(tape.matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(d)));
  const ad::NodeId w = tape.softmax(logits, std::move(mask));
  const ad::NodeId h = tape.add(last, tape.matmul(w, v));

  const ad::NodeId ff = tape.add(
      tape.matmul(tape.relu(tape.add(tape.matmul(h, params["att.ff_w1"]), params["att.ff_b1"])),
                  params["att.ff_w2"]),
      params["att.ff_b2"]);
  return {w, tape.add(h, ff)};
}

}  // namespace

ad::NodeId AttentionEncoder::encode(ad::Tape& tape, const ad::BoundParams& params,
                                    std::span<const ItemId> windows, std::size_t window_len) const {
  if (window_len == 0 || windows.size() % window_len != 0) {
    throw ShapeError("attention encoder: window buffer is not a multiple of L");
  }
  check_items(windows, tape.value(params[kItemTable]).rows() - 1);
  const std::size_t batch = windows.size() / window_len;
  std::vector<ad::NodeId> rows;
  rows.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    rows.push_back(attend(tape, params, windows.subspan(b * window_len, window_len)).output);
  }
  if (rows.size() == 1) return rows.front();
  return tape.concat(rows, 0);
}

std::vector<double> AttentionEncoder::attention_weights(const ParamSet& params,
                                                        std::span<const ItemId> window) {
  ad::Tape tape;
  const ad::BoundParams bound(tape, params);
  check_items(window, num_items(params));
  const Tensor& w = tape.value(attend(tape, bound, window).weights);
  return {w.values().begin(), w.values().end()};
}

std::unique_ptr<SequenceEncoder> make_encoder(EncoderKind kind) {
  if (kind == EncoderKind::Recurrent) return std::make_unique<RecurrentEncoder>();
  return std::make_unique<AttentionEncoder>();
}

// ---------------------------------------------------------------- helpers

Tensor encode_values(const SequenceEncoder& encoder, const ParamSet& predictor,
                     std::span<const ItemId> windows, std::size_t window_len) {
  ad::Tape tape;
  const ad::BoundParams bound(tape, predictor);
  return tape.value(encoder.encode(tape, bound, windows, window_len));
}

Tensor encode_recurrent(std::span<const ItemId> window, const ParamSet& predictor) {
  return encode_values(RecurrentEncoder{}, predictor, window, window.size());
}

Tensor encode_attention(std::span<const ItemId> window, const ParamSet& predictor) {
  return encode_values(AttentionEncoder{}, predictor, window, window.size());
}

ad::NodeId score(ad::Tape& tape, ad::NodeId embeddings, ad::NodeId item_table,
                 std::span<const ItemId> items) {
  if (items.empty()) throw ShapeError("score: empty item list");
  check_items(items, tape.value(item_table).rows() - 1);
  return tape.matmul_nt(embeddings, tape.gather(item_table, {items.begin(), items.end()}));
}

Tensor score_all(const Tensor& embeddings, const Tensor& item_table) {
  const std::size_t d = item_table.cols();
  if (embeddings.cols() != d) {
    throw ShapeError("score_all: embedding width " + std::to_string(embeddings.cols()) +
                     " vs item table " + shape_str(item_table.shape()));
  }
  const std::size_t items = item_table.rows() - 1;
  Tensor out({embeddings.rows(), items});
  kernels::gemm_nt(embeddings.data(), item_table.data() + d, out.data(), embeddings.rows(), d,
                   items);
  return out;
}

std::vector<double> score(const Tensor& embedding, std::span<const ItemId> items,
                          const Tensor& item_table) {
  if (items.empty()) throw ShapeError("score: empty item list");
  check_items(items, item_table.rows() - 1);
  const std::size_t d = item_table.cols();
  if (embedding.size() != d) throw ShapeError("score: embedding width mismatch");
  std::vector<double> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    out[i] = kernels::dot(embedding.data(), item_table.data() + items[i] * d, d);
  }
  return out;
}

}  // namespace ltap::enc
