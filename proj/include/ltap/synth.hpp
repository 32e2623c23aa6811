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

// Long-tailed synthetic interaction corpus.
//
// Sequence lengths follow min_len + length_scale * Lomax(gamma), floored and
// clamped to [min_len, max_len]. Items are split into clusters; the next
// cluster is drawn from a shared low-rank Markov chain
//   P(c' | c) = softmax_c'(sharpness * <a_c, b_c'> / sqrt(rank))
// and the item within a cluster from a Zipf law. Longer histories draw from
// flatter Zipf laws (deeper into each cluster's catalogue), which gives head
// and tail users different item mixes on top of the shared dynamics.
// Rarely drawn items are folded away so every user survives the default
// preprocessing filters.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ltap/data.hpp"

namespace ltap::synth {

struct SynthConfig {
  std::size_t users = 1000;
  std::size_t items = 400;
  double gamma = 1.5;
  double sharpness = 4.0;
  std::uint64_t seed = 7;
  std::size_t min_len = 10;
  std::size_t max_len = 400;
  double length_scale = 20.0;
  std::size_t clusters = 10;
  std::size_t rank = 3;
  /// Zipf exponent for users at min_len.
  double zipf = 1.2;
  /// Exponent shrinks as (min_len / len)^niche_shift.
  double niche_shift = 1.0;
  /// Probability of staying in the current cluster.
  double stay = 0.0;
  /// Items drawn fewer times are folded into a popular item of their cluster.
  std::size_t min_item_records = 5;

  void validate() const;
};

std::size_t draw_length(const SynthConfig& cfg, Rng& rng);

std::vector<data::Interaction> synth_generate(const SynthConfig& cfg);

/// Writes `user \t item \t timestamp` lines.
void write_interactions(std::ostream& out, const std::vector<data::Interaction>& events);
void write_interactions(const std::filesystem::path& path,
                        const std::vector<data::Interaction>& events);

/// Share of events owned by the top `fraction` of users by event count.
double top_share(const std::vector<data::Interaction>& events, double fraction);

}  // namespace ltap::synth
