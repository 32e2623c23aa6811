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
#include <numeric>

#include "ltap/encoders.hpp"
#include "ltap/error.hpp"
#include "ltap/rng.hpp"
#include "ltap/verify.hpp"

using namespace ltap;
using enc::EncoderKind;

namespace {

ParamSet random_model(EncoderKind kind, std::size_t items, std::size_t dim, std::size_t window,
                      std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  return enc::init_predictor(*enc::make_encoder(kind), {items, dim, window}, rng);
}

void zero_all(ParamSet& p) {
  for (auto& [name, t] : p) std::fill(t.values().begin(), t.values().end(), 0.0);
}

// Hand-set two-step recurrent case.
ParamSet hand_gru() {
  ParamSet p;
  p.set(enc::kItemTable, Tensor({3, 2}, {0, 0, 0.5, -0.3, 0.2, 0.8}));
  p.set("gru.w_z", Tensor({2, 2}, {0.1, 0.2, 0.3, 0.4}));
  p.set("gru.w_r", Tensor({2, 2}, {-0.2, 0.1, 0.05, 0.3}));
  p.set("gru.w_n", Tensor({2, 2}, {0.6, -0.4, 0.2, 0.1}));
  p.set("gru.u_z", Tensor({2, 2}, {0.3, -0.1, 0.2, 0.2}));
  p.set("gru.u_r", Tensor({2, 2}, {0.1, 0.4, -0.3, 0.2}));
  p.set("gru.u_n", Tensor({2, 2}, {-0.5, 0.3, 0.25, 0.15}));
  p.set("gru.b_z", Tensor({2}, {0.01, -0.02}));
  p.set("gru.b_r", Tensor({2}, {0.03, 0.0}));
  p.set("gru.b_n", Tensor({2}, {-0.1, 0.05}));
  return p;
}

// Straight-line cell: row vector times matrix.
std::vector<double> hand_cell(const ParamSet& p, std::span<const ItemId> window) {
  auto vm = [](const std::vector<double>& v, const Tensor& m) {
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t j = 0; j < m.cols(); ++j)
      for (std::size_t i = 0; i < v.size(); ++i) out[j] += v[i] * m.at(i, j);
    return out;
  };
  const Tensor& e = p.at(enc::kItemTable);
  std::vector<double> h(e.cols(), 0.0);
  for (ItemId it : window) {
    if (it == kPadding) continue;
    std::vector<double> x(e.data() + it * e.cols(), e.data() + (it + 1) * e.cols());
    const auto xz = vm(x, p.at("gru.w_z")), hz = vm(h, p.at("gru.u_z"));
    const auto xr = vm(x, p.at("gru.w_r")), hr = vm(h, p.at("gru.u_r"));
    std::vector<double> z(h.size()), r(h.size()), rh(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      z[i] = 1 / (1 + std::exp(-(xz[i] + hz[i] + p.at("gru.b_z")[i])));
      r[i] = 1 / (1 + std::exp(-(xr[i] + hr[i] + p.at("gru.b_r")[i])));
      rh[i] = r[i] * h[i];
    }
    const auto xn = vm(x, p.at("gru.w_n")), hn = vm(rh, p.at("gru.u_n"));
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double n = std::tanh(xn[i] + hn[i] + p.at("gru.b_n")[i]);
      h[i] = (1 - z[i]) * n + z[i] * h[i];
    }
  }
  return h;
}

}  // namespace

TEST_CASE("recurrent: zero weights stay at zero") {
  ParamSet p = random_model(EncoderKind::Recurrent, 5, 3, 4, 1);
  zero_all(p);
  const ItemId w[] = {1, 2, 3, 4};
  const Tensor h = enc::encode_recurrent(w, p);
  for (double v : h.values()) CHECK(v == 0.0);
}

TEST_CASE("recurrent: all-padding window encodes to zero") {
  const ParamSet p = random_model(EncoderKind::Recurrent, 5, 3, 4, 2);
  const ItemId w[] = {0, 0, 0, 0};
  const Tensor h = enc::encode_recurrent(w, p);
  CHECK(h.shape() == Shape{1, 3});
  for (double v : h.values()) CHECK(v == 0.0);
}

TEST_CASE("recurrent: two hand-computed steps") {
  const ParamSet p = hand_gru();
  const ItemId w[] = {1, 2};
  const Tensor h = enc::encode_recurrent(w, p);
  const auto want = hand_cell(p, w);
  CHECK(h[0] == doctest::Approx(want[0]).epsilon(1e-14));
  CHECK(h[1] == doctest::Approx(want[1]).epsilon(1e-14));
  // pinned from an independent numpy evaluation
  CHECK(h[0] == doctest::Approx(0.10396511605714204).epsilon(1e-14));
  CHECK(h[1] == doctest::Approx(-0.030071393286171196).epsilon(1e-14));
}

TEST_CASE("recurrent: batched rows match the straight-line cell") {
  const ParamSet p = random_model(EncoderKind::Recurrent, 6, 3, 4, 3);
  const std::vector<ItemId> windows = {0, 0, 3, 1, 2, 5, 6, 1, 0, 0, 0, 4};
  const Tensor h = enc::encode_values(enc::RecurrentEncoder{}, p, windows, 4);
  for (std::size_t b = 0; b < 3; ++b) {
    const auto want = hand_cell(p, std::span<const ItemId>(windows).subspan(b * 4, 4));
    for (std::size_t i = 0; i < 3; ++i) CHECK(h.at(b, i) == doctest::Approx(want[i]).epsilon(1e-13));
  }
}

TEST_CASE("out-of-range items are rejected") {
  const ParamSet g = random_model(EncoderKind::Recurrent, 5, 2, 3, 4);
  const ParamSet a = random_model(EncoderKind::Attention, 5, 2, 3, 4);
  const ItemId w[] = {1, 2, 6};
  CHECK_THROWS_AS(enc::encode_recurrent(w, g), DataError);
  CHECK_THROWS_AS(enc::encode_attention(w, a), DataError);
  const Tensor e({2}, {1, 1});
  const ItemId bad[] = {6};
  CHECK_THROWS_AS(enc::score(e, bad, g.at(enc::kItemTable)), DataError);
}

TEST_CASE("attention: a single real item takes all the weight") {
  const ParamSet p = random_model(EncoderKind::Attention, 5, 3, 4, 5);
  const ItemId w[] = {0, 0, 0, 2};
  const auto weights = enc::AttentionEncoder::attention_weights(p, w);
  CHECK(weights == std::vector<double>{0, 0, 0, 1});
}

TEST_CASE("attention: identical items with zero positions attend uniformly") {
  ParamSet p = random_model(EncoderKind::Attention, 5, 3, 4, 6);
  Tensor& pos = p.at("att.pos");
  std::fill(pos.values().begin(), pos.values().end(), 0.0);
  const ItemId full[] = {3, 3, 3, 3};
  for (double v : enc::AttentionEncoder::attention_weights(p, full)) CHECK(v == doctest::Approx(0.25));
  const ItemId padded[] = {0, 3, 3, 3};
  const auto w = enc::AttentionEncoder::attention_weights(p, padded);
  CHECK(w[0] == 0.0);
  for (std::size_t i = 1; i < 4; ++i) CHECK(w[i] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("attention: weights sum to one over unmasked positions") {
  Rng rng = make_rng(7, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const ParamSet p = random_model(EncoderKind::Attention, 8, 4, 5, 100 + trial);
    std::vector<ItemId> w(5);
    const std::size_t pad = uniform_index(rng, 5);
    for (std::size_t i = 0; i < 5; ++i) w[i] = i < pad ? 0 : static_cast<ItemId>(1 + uniform_index(rng, 8));
    const auto weights = enc::AttentionEncoder::attention_weights(p, w);
    CHECK(std::accumulate(weights.begin(), weights.end(), 0.0) == doctest::Approx(1.0));
    for (std::size_t i = 0; i < pad; ++i) CHECK(weights[i] == 0.0);
  }
}

TEST_CASE("output does not depend on the amount of left padding") {
  for (auto kind : {EncoderKind::Recurrent, EncoderKind::Attention}) {
    const ParamSet p = random_model(kind, 7, 3, 6, 8);
    const auto encoder = enc::make_encoder(kind);
    const std::vector<ItemId> suffix = {4, 1, 7};
    const Tensor base = enc::encode_values(*encoder, p, suffix, 3);
    for (std::size_t pad = 1; pad <= 3; ++pad) {
      std::vector<ItemId> w(pad, kPadding);
      w.insert(w.end(), suffix.begin(), suffix.end());
      const Tensor h = enc::encode_values(*encoder, p, w, w.size());
      for (std::size_t i = 0; i < 3; ++i) CHECK(h[i] == doctest::Approx(base[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("score examples") {
  ParamSet p;
  p.set(enc::kItemTable, Tensor({4, 3}, {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1}));
  const Tensor& table = p.at(enc::kItemTable);
  const Tensor e1({3}, {1, 0, 0});
  const ItemId items[] = {1, 2, 3};
  CHECK(enc::score(e1, items, table) == std::vector<double>{1, 0, 0});
  const Tensor zero({3});
  CHECK(enc::score(zero, items, table) == std::vector<double>{0, 0, 0});
  const Tensor all = enc::score_all(Tensor({1, 3}, {1, 0, 0}), table);
  CHECK(all.shape() == Shape{1, 3});
  CHECK(all[0] == 1.0);
  const ItemId none[] = {1};
  CHECK_THROWS_AS(enc::score(e1, std::span<const ItemId>(none).first(0), table), ShapeError);
}

TEST_CASE("score is linear in the embedding") {
  const ParamSet p = random_model(EncoderKind::Recurrent, 9, 4, 3, 9);
  const Tensor& table = p.at(enc::kItemTable);
  Rng rng = make_rng(9, 1);
  Tensor e({4});
  for (double& v : e.values()) v = normal01(rng);
  std::vector<ItemId> items(9);
  std::iota(items.begin(), items.end(), 1);
  const auto s = enc::score(e, items, table);
  for (double a : {-2.0, 0.5, 3.0}) {
    Tensor scaled = e;
    for (double& v : scaled.values()) v *= a;
    const auto sa = enc::score(scaled, items, table);
    for (std::size_t i = 0; i < items.size(); ++i) CHECK(sa[i] == doctest::Approx(a * s[i]).epsilon(1e-13));
  }
}

TEST_CASE("initialization bounds and padding row") {
  const ParamSet p = random_model(EncoderKind::Attention, 10, 4, 5, 10);
  for (const auto& [name, t] : p) {
    for (double v : t.values()) CHECK(std::abs(v) <= 0.5);
  }
  const Tensor& table = p.at(enc::kItemTable);
  for (std::size_t j = 0; j < 4; ++j) CHECK(table.at(0, j) == 0.0);
  CHECK(enc::num_items(p) == 10);
  CHECK(enc::parse_encoder_kind("gru") == EncoderKind::Recurrent);
  CHECK(enc::parse_encoder_kind("attention") == EncoderKind::Attention);
  CHECK_THROWS(enc::parse_encoder_kind("cnn"));
}

TEST_CASE("both encoders pass central differences on small instances") {
  const auto r = verify::model_gradcheck_suite(30, 31);
  CAPTURE(r.detail);
  CHECK(r.max_error < 1e-4);
}
