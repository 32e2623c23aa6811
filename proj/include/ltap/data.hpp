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
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ltap/rng.hpp"
#include "ltap/types.hpp"

namespace ltap::data {

struct Interaction {
  std::string user;
  std::string item;
  std::int64_t timestamp = 0;

  bool operator==(const Interaction&) const = default;
};

/// Tab-separated `user_id item_id timestamp [rating]`, one event per line.
/// Blank lines and lines starting with '#' are skipped; a fourth column
/// (an explicit rating) is accepted and ignored. Events come back in file
/// order. Throws DataError with the line number on malformed input.
std::vector<Interaction> parse_interactions(const std::filesystem::path& path);
std::vector<Interaction> parse_interactions(std::istream& in, const std::string& source);

/// External item ids by dense index: ids[i - 1] is item i.
struct ItemVocab {
  std::vector<std::string> ids;

  std::size_t size() const { return ids.size(); }
  /// Order-sensitive hash of the id table.
  std::uint64_t fingerprint() const;
};

enum class Cohort : std::uint8_t { Existing = 0, New = 1 };

/// A user's items in time order. `label` is -1 until head/tail labelling.
struct UserSequence {
  UserIndex index = 0;
  std::string id;
  std::vector<ItemId> items;
  int label = -1;
  Cohort cohort = Cohort::Existing;
};

struct PreprocessOptions {
  std::size_t min_item_records = 5;
  std::size_t min_user_feedbacks = 10;
};

struct Preprocessed {
  ItemVocab vocab;
  std::vector<UserSequence> users;
  std::size_t interactions = 0;
};

/// Drops items with fewer than `min_item_records` events, then users with
/// fewer than `min_user_feedbacks` remaining events (one pass each, in that
/// order), then sorts each user's events by timestamp with file order
/// breaking ties. Users and items are indexed by first appearance among the
/// surviving events. Throws DataError if nothing survives.
Preprocessed preprocess(const std::vector<Interaction>& events, const PreprocessOptions& opts = {});

/// A user with a held-out target: the last item of the sequence.
struct HeldOutUser {
  UserSequence prefix;  // everything before the target
  ItemId target = kPadding;
};

struct UserSplit {
  std::vector<HeldOutUser> existing;
  std::vector<HeldOutUser> fresh;
};

/// Seeded uniform user-level split; round(fraction * |U|) users become
/// existing users. Both cohorts hold out their most recent item.
UserSplit split_users(std::vector<UserSequence> users, double existing_fraction, std::uint64_t seed);

/// Sorts by prefix length descending (ties: user index ascending) and marks
/// the first ceil(fraction * |U|) users as head (label 1), the rest tail.
void head_tail_label(std::vector<HeldOutUser>& users, double head_fraction);
std::size_t head_count(std::size_t users, double head_fraction);

/// Target positions t (1-based) used for a sequence of length n: t in
/// [L+1, n] when n > L, otherwise [2, n] with left padding.
std::pair<std::size_t, std::size_t> task_target_range(std::size_t n, std::size_t window);

/// The L items preceding position t (1-based), left-padded.
void window_before(std::span<const ItemId> seq, std::size_t t, std::size_t window, ItemId* out);

std::vector<TaskWindow> build_tasks(const UserSequence& seq, std::size_t window);

/// Uniform draws, with replacement, from items 1..num_items that are not in
/// `seen` (sorted ascending). Throws DataError when no item is eligible.
std::vector<ItemId> sample_negatives(std::span<const ItemId> seen, std::size_t num_items,
                                     std::size_t count, Rng& rng);

struct UserRecord {
  UserIndex index = 0;
  std::string id;
  std::vector<ItemId> history;  // training items (existing) or eval prefix (new)
  ItemId target = kPadding;
  int label = 0;
  Cohort cohort = Cohort::Existing;
  std::vector<ItemId> seen;  // sorted unique items of `history`
};

struct DataOptions {
  double existing_fraction = 0.8;
  double head_fraction = 0.2;
  std::uint64_t split_seed = 1;
  PreprocessOptions preprocess;
};

struct DatasetBundle {
  ItemVocab vocab;
  std::vector<UserRecord> existing;
  std::vector<UserRecord> fresh;
  std::size_t interactions = 0;
  std::uint64_t content_hash = 0;

  std::size_t num_items() const { return vocab.size(); }
};

DatasetBundle make_bundle(const Preprocessed& pre, const DataOptions& opts);

/// FNV-1a 64 over bytes; chainable through `basis`.
std::uint64_t fnv1a(std::span<const char> bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t dataset_key(const std::filesystem::path& tsv, const DataOptions& opts);

/// Binary cache of a prepared bundle.
void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& path);
DatasetBundle load_bundle(const std::filesystem::path& path);

/// Parses, preprocesses, splits and labels `tsv`. When `cache_dir` is not
/// empty, a bundle keyed by the content hash of file bytes and options is
/// read from or written to it.
DatasetBundle prepare_dataset(const std::filesystem::path& tsv, const DataOptions& opts,
                              const std::filesystem::path& cache_dir = {});

}  // namespace ltap::data
