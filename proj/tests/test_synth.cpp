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

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "ltap/data.hpp"
#include "ltap/error.hpp"
#include "ltap/synth.hpp"

using namespace ltap;
using synth::SynthConfig;

namespace {

std::map<std::string, std::vector<const data::Interaction*>> by_user(
    const std::vector<data::Interaction>& ev) {
  std::map<std::string, std::vector<const data::Interaction*>> m;
  for (const auto& e : ev) m[e.user].push_back(&e);
  return m;
}

}  // namespace

TEST_CASE("default corpus is long-tailed") {
  const auto ev = synth::synth_generate(SynthConfig{});
  // independent share computation
  std::map<std::string, std::size_t> counts;
  for (const auto& e : ev) ++counts[e.user];
  std::vector<std::size_t> c;
  for (const auto& [u, n] : counts) c.push_back(n);
  std::sort(c.rbegin(), c.rend());
  const std::size_t top = c.size() / 5;
  const double share = static_cast<double>(std::accumulate(c.begin(), c.begin() + top, std::size_t{0})) /
                       static_cast<double>(ev.size());
  CHECK(c.size() == 1000);
  CHECK(share > 0.5);
  CHECK(share > 0.55);
  CHECK(synth::top_share(ev, 0.2) == doctest::Approx(share).epsilon(1e-12));
  // frozen from the generator at seed 7
  CHECK(ev.size() == 42627);
  CHECK(share == doctest::Approx(0.603397).epsilon(1e-5));
}

TEST_CASE("same seed, same corpus; other seed, other corpus") {
  SynthConfig cfg;
  cfg.users = 100;
  cfg.items = 80;
  const auto a = synth::synth_generate(cfg);
  const auto b = synth::synth_generate(cfg);
  CHECK(a == b);
  cfg.seed = 8;
  CHECK(!(synth::synth_generate(cfg) == a));
}

TEST_CASE("lengths, timestamps and ids") {
  SynthConfig cfg;
  cfg.users = 400;
  cfg.items = 120;
  cfg.max_len = 60;
  const auto ev = synth::synth_generate(cfg);
  const auto users = by_user(ev);
  CHECK(users.size() == 400);
  bool clamped = false;
  for (const auto& [u, list] : users) {
    CHECK(list.size() >= cfg.min_len);
    CHECK(list.size() <= cfg.max_len);
    clamped = clamped || list.size() == cfg.max_len;
    for (std::size_t t = 0; t < list.size(); ++t) CHECK(list[t]->timestamp == static_cast<std::int64_t>(t + 1));
  }
  CHECK(clamped);
  for (const auto& e : ev) {
    CHECK(e.user[0] == 'u');
    REQUIRE(e.item[0] == 'i');
    const int id = std::stoi(e.item.substr(1));
    CHECK(id >= 1);
    CHECK(id <= 120);
  }
}

TEST_CASE("every generated user survives preprocessing") {
  for (std::uint64_t seed : {1, 2, 3}) {
    SynthConfig cfg;
    cfg.users = 300;
    cfg.items = 200;
    cfg.seed = seed;
    const auto ev = synth::synth_generate(cfg);
    const auto pre = data::preprocess(ev);
    CHECK(pre.users.size() == 300);
    CHECK(pre.interactions == ev.size());
  }
}

TEST_CASE("length distribution follows the shifted Pareto tail") {
  SynthConfig cfg;
  cfg.max_len = 1000000;
  Rng rng = make_rng(3, 0);
  const std::size_t draws = 100000;
  std::vector<std::size_t> len(draws);
  for (auto& l : len) l = synth::draw_length(cfg, rng);
  // P(len >= m) = (1 + (m - min_len) / scale)^-gamma for integer m
  for (std::size_t m : {11, 15, 20, 30, 50, 100, 300}) {
    const double p = std::pow(1.0 + static_cast<double>(m - cfg.min_len) / cfg.length_scale, -cfg.gamma);
    const double got = static_cast<double>(std::count_if(len.begin(), len.end(), [&](std::size_t l) { return l >= m; })) / draws;
    const double sigma = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(got - p) < 4 * sigma);
  }
}

TEST_CASE("writer output parses back to the same events") {
  SynthConfig cfg;
  cfg.users = 30;
  cfg.items = 40;
  const auto ev = synth::synth_generate(cfg);
  std::ostringstream out;
  synth::write_interactions(out, ev);
  std::istringstream in(out.str());
  CHECK(data::parse_interactions(in, "mem") == ev);
  ltap::testing::TempDir dir;
  synth::write_interactions(dir / "c.tsv", ev);
  CHECK(ltap::testing::read_file(dir / "c.tsv") == out.str());
  CHECK(std::distance(std::filesystem::directory_iterator(dir.path()), {}) == 1);  // no temp left
}

TEST_CASE("head users reach deeper into the catalogue") {
  const auto ev = synth::synth_generate(SynthConfig{});
  const auto pre = data::preprocess(ev);
  std::vector<double> item_count(pre.vocab.size() + 1, 0);
  for (const auto& u : pre.users)
    for (ItemId i : u.items) ++item_count[i];
  // mean popularity of consumed items per user, head vs tail by length
  std::vector<std::pair<std::size_t, double>> stats;
  for (const auto& u : pre.users) {
    double s = 0;
    for (ItemId i : u.items) s += item_count[i];
    stats.emplace_back(u.items.size(), s / static_cast<double>(u.items.size()));
  }
  std::sort(stats.begin(), stats.end(), [](auto& a, auto& b) { return a.first > b.first; });
  double head = 0, tail = 0;
  const std::size_t h = stats.size() / 5;
  for (std::size_t i = 0; i < stats.size(); ++i) (i < h ? head : tail) += stats[i].second;
  head /= static_cast<double>(h);
  tail /= static_cast<double>(stats.size() - h);
  CHECK(head < tail);
}

TEST_CASE("invalid generator settings") {
  auto bad = [](auto mutate) {
    SynthConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](SynthConfig& c) { c.users = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SynthConfig& c) { c.items = 5; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SynthConfig& c) { c.gamma = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SynthConfig& c) { c.max_len = 5; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SynthConfig& c) { c.stay = 1.5; }).validate(), ConfigError);
}
