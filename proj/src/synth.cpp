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

#include "ltap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <span>

#include "ltap/error.hpp"
#include "ltap/tensor.hpp"

namespace ltap::synth {

void SynthConfig::validate() const {
  if (users == 0) throw ConfigError("synth: users must be positive");
  if (clusters == 0 || items < clusters) throw ConfigError("synth: need at least one item per cluster");
  if (!(gamma > 0)) throw ConfigError("synth: gamma must be positive");
  if (min_len < 2 || max_len < min_len) throw ConfigError("synth: need 2 <= min_len <= max_len");
  if (rank == 0) throw ConfigError("synth: rank must be positive");
  if (!(length_scale > 0)) throw ConfigError("synth: length_scale must be positive");
  if (!(stay >= 0 && stay <= 1)) throw ConfigError("synth: stay must lie in [0, 1]");
  if (!(zipf >= 0) || !(niche_shift >= 0)) throw ConfigError("synth: zipf exponents must be >= 0");
}

std::size_t draw_length(const SynthConfig& cfg, Rng& rng) {
  const double u = uniform01(rng);
  const double lomax = std::pow(1.0 - u, -1.0 / cfg.gamma) - 1.0;
  const double raw = std::floor(static_cast<double>(cfg.min_len) + cfg.length_scale * lomax);
  if (!(raw < static_cast<double>(cfg.max_len))) return cfg.max_len;
  return std::max(cfg.min_len, static_cast<std::size_t>(raw));
}

namespace {

// Index drawn with probability proportional to the increments of `cdf`.
std::size_t draw_cdf(std::span<const double> cdf, Rng& rng) {
  const double u = uniform01(rng) * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

std::vector<data::Interaction> synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, kStreamSynth);

  const std::size_t c = cfg.clusters;
  std::vector<double> a(c * cfg.rank), b(c * cfg.rank);
  for (double& v : a) v = normal01(rng);
  for (double& v : b) v = normal01(rng);
  std::vector<std::vector<double>> transition(c, std::vector<double>(c));
  const double norm = cfg.sharpness / std::sqrt(static_cast<double>(cfg.rank));
  for (std::size_t from = 0; from < c; ++from) {
    std::vector<double> logits(c);
    for (std::size_t to = 0; to < c; ++to) {
      double s = 0;
      for (std::size_t r = 0; r < cfg.rank; ++r) s += a[from * cfg.rank + r] * b[to * cfg.rank + r];
      logits[to] = norm * s;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double acc = 0;
    for (std::size_t to = 0; to < c; ++to) {
      acc += std::exp(logits[to] - mx);
      transition[from][to] = acc;
    }
  }

  // cluster q holds items q, q + c, q + 2c, ... (1-based ids q + 1 + r * c)
  const std::size_t per_cluster = (cfg.items + c - 1) / c;
  auto cluster_size = [&](std::size_t q) { return (cfg.items - q + c - 1) / c; };

  struct Draw {
    std::size_t user, item, time;
  };
  std::vector<Draw> draws;
  std::vector<std::size_t> count(cfg.items + 1, 0);
  std::vector<double> cdf(per_cluster);
  for (std::size_t u = 0; u < cfg.users; ++u) {
    const std::size_t len = draw_length(cfg, rng);
    const double exponent =
        cfg.zipf * std::pow(static_cast<double>(cfg.min_len) / static_cast<double>(len),
                            cfg.niche_shift);
    double acc = 0;
    for (std::size_t r = 0; r < per_cluster; ++r) {
      acc += std::pow(static_cast<double>(r + 1), -exponent);
      cdf[r] = acc;
    }
    std::size_t cluster = uniform_index(rng, c);
    for (std::size_t t = 0; t < len; ++t) {
      if (t > 0 && !(uniform01(rng) < cfg.stay)) cluster = draw_cdf(transition[cluster], rng);
      const std::size_t r = draw_cdf(std::span<const double>(cdf).first(cluster_size(cluster)), rng);
      const std::size_t item = cluster + 1 + r * c;
      draws.push_back({u, item, t + 1});
      ++count[item];
    }
  }

  // Fold events of items below the item filter into their cluster's most
  // popular item (or the overall most popular one), so that no user loses
  // events to the default preprocessing.
  const std::size_t top = static_cast<std::size_t>(
      std::max_element(count.begin() + 1, count.end()) - count.begin());
  std::vector<std::size_t> target(cfg.items + 1);
  for (std::size_t q = 0; q < c; ++q) {
    std::size_t best = q + 1;
    for (std::size_t item = q + 1; item <= cfg.items; item += c)
      if (count[item] > count[best]) best = item;
    std::size_t folded = count[best];
    for (std::size_t item = q + 1; item <= cfg.items; item += c)
      if (item != best && count[item] < cfg.min_item_records) folded += count[item];
    const std::size_t sink = folded >= cfg.min_item_records ? best : top;
    for (std::size_t item = q + 1; item <= cfg.items; item += c)
      target[item] = count[item] >= cfg.min_item_records ? item : sink;
  }

  std::vector<data::Interaction> events;
  events.reserve(draws.size());
  for (const Draw& d : draws) {
    events.push_back({"u" + std::to_string(d.user), "i" + std::to_string(target[d.item]),
                      static_cast<std::int64_t>(d.time)});
  }
  return events;
}

void write_interactions(std::ostream& out, const std::vector<data::Interaction>& events) {
  for (const auto& e : events) out << e.user << '\t' << e.item << '\t' << e.timestamp << '\n';
}

void write_interactions(const std::filesystem::path& path,
                        const std::vector<data::Interaction>& events) {
  const auto tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    write_interactions(out, events);
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

double top_share(const std::vector<data::Interaction>& events, double fraction) {
  if (events.empty()) return 0.0;
  std::map<std::string, std::size_t> counts;
  for (const auto& e : events) ++counts[e.user];
  std::vector<std::size_t> sorted;
  sorted.reserve(counts.size());
  for (const auto& [_, n] : counts) sorted.push_back(n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t top = data::head_count(sorted.size(), fraction);
  std::size_t owned = 0;
  for (std::size_t i = 0; i < top; ++i) owned += sorted[i];
  return static_cast<double>(owned) / static_cast<double>(events.size());
}

}  // namespace ltap::synth
