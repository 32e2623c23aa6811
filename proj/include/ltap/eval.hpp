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

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ltap/align.hpp"
#include "ltap/data.hpp"

namespace ltap::eval {

/// `scores[i]` is the score of item i + 1. Rank is 1 + #items scoring
/// strictly higher + #items with an equal score and a smaller index.
/// Throws DataError for the padding item or an out-of-range target.
std::size_t rank_target(std::span<const double> scores, ItemId target);

/// Fraction of ranks <= cutoff. Empty input gives 0.
double hit_ratio(std::span<const std::size_t> ranks, std::size_t cutoff);
/// Mean of 1[rank <= cutoff] / log2(rank + 1).
double ndcg(std::span<const std::size_t> ranks, std::size_t cutoff);

struct UserRank {
  UserIndex user = 0;
  std::size_t rank = 0;
  int label = 0;
  data::Cohort cohort = data::Cohort::Existing;
};

/// Worker count from LT_THREADS (default: hardware concurrency, at least 1).
std::size_t eval_threads();

/// Ranks every held-out target (existing and new users) among all items,
/// feeding the last `window` items of each user's history.
std::vector<UserRank> rank_users(const align::Model& model, const data::DatasetBundle& data,
                                 std::size_t window, std::size_t threads = 0);

/// Cohort names in report order.
const std::vector<std::string>& cohort_names();
bool in_cohort(const UserRank& r, const std::string& cohort);

struct MetricRow {
  std::string cohort;
  std::size_t cutoff = 0;
  std::string metric;  // "HR" or "NDCG"
  double mean = 0.0;
  double std = 0.0;    // sample standard deviation over repetitions
  std::size_t n = 0;   // users in the cohort
};

struct CohortReport {
  std::vector<std::size_t> cutoffs;
  std::size_t repetitions = 0;
  std::vector<MetricRow> rows;
  std::vector<std::string> warnings;  // omitted (empty) cohorts

  /// Throws std::out_of_range when absent.
  const MetricRow& at(const std::string& cohort, std::size_t cutoff, const std::string& metric) const;
  bool has(const std::string& cohort) const;
};

/// One rank list per repetition (same users in each).
CohortReport summarize(const std::vector<std::vector<UserRank>>& repetitions,
                       std::vector<std::size_t> cutoffs);

/// One repetition per model (typically one per training seed).
CohortReport evaluate(std::span<const align::Model> models, const data::DatasetBundle& data,
                      std::size_t window, std::vector<std::size_t> cutoffs,
                      std::size_t threads = 0);

/// Header "cohort,cutoff,metric,mean,std,n".
void write_csv(std::ostream& out, const CohortReport& report);
void print_table(std::ostream& out, const CohortReport& report);

/// Head/tail probe on frozen sequence embeddings.
///
/// Tail users are subsampled to the number of head users, users are split
/// into train and test sets within each class, and `windows_per_user`
/// windows of each user are embedded. A fresh two-layer perceptron of the
/// discriminator's shape is trained with full-batch Adam. Chance is 0.5.
struct ProbeOptions {
  std::size_t hidden = 0;  // 0 = embedding dim
  std::size_t epochs = 300;
  double learning_rate = 0.01;
  double test_fraction = 0.3;
  std::size_t windows_per_user = 4;
  std::uint64_t seed = 1;
};

struct ProbeResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

ProbeResult probe_head_tail(const align::Model& model, const std::vector<align::UserTask>& tasks,
                            std::size_t window, const ProbeOptions& opts);

}  // namespace ltap::eval
