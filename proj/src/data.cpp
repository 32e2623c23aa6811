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

#include "ltap/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "ltap/error.hpp"
#include "ltap/tensor.hpp"

namespace ltap::data {

// ---------------------------------------------------------------- parsing

std::vector<Interaction> parse_interactions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_interactions(in, path.string());
}

std::vector<Interaction> parse_interactions(std::istream& in, const std::string& source) {
  std::vector<Interaction> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    auto fail = [&](const std::string& why) {
      throw DataError(source + ":" + std::to_string(lineno) + ": " + why);
    };
    if (fields.size() != 3 && fields.size() != 4) {
      fail("expected 3 tab-separated fields (user, item, timestamp), got " +
           std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) fail("empty user or item id");
    std::int64_t ts = 0;
    const auto ts_field = fields[2];
    const auto [ptr, ec] = std::from_chars(ts_field.data(), ts_field.data() + ts_field.size(), ts);
    if (ec != std::errc() || ptr != ts_field.data() + ts_field.size()) {
      fail("timestamp '" + std::string(ts_field) + "' is not an integer");
    }
    events.push_back({std::string(fields[0]), std::string(fields[1]), ts});
  }
  return events;
}

std::uint64_t ItemVocab::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& id : ids) {
    h = fnv1a(id, h);
    const char sep = '\0';
    h = fnv1a(std::span<const char>(&sep, 1), h);
  }
  return h;
}

// ---------------------------------------------------------------- preprocess

Preprocessed preprocess(const std::vector<Interaction>& events, const PreprocessOptions& opts) {
  std::unordered_map<std::string, std::size_t> item_count;
  for (const auto& e : events) ++item_count[e.item];

  std::vector<std::size_t> kept;
  kept.reserve(events.size());
  std::unordered_map<std::string, std::size_t> user_count;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (item_count[events[i].item] >= opts.min_item_records) {
      kept.push_back(i);
      ++user_count[events[i].user];
    }
  }

  Preprocessed out;
  std::unordered_map<std::string, ItemId> item_index;
  std::unordered_map<std::string, UserIndex> user_index;
  std::vector<std::vector<std::pair<std::int64_t, ItemId>>> timelines;
  for (std::size_t i : kept) {
    const Interaction& e = events[i];
    if (user_count[e.user] < opts.min_user_feedbacks) continue;
    auto [it, fresh_item] = item_index.try_emplace(e.item, static_cast<ItemId>(out.vocab.size() + 1));
    if (fresh_item) out.vocab.ids.push_back(e.item);
    auto [ut, fresh_user] = user_index.try_emplace(e.user, static_cast<UserIndex>(out.users.size()));
    if (fresh_user) {
      UserSequence s;
      s.index = ut->second;
      s.id = e.user;
      out.users.push_back(std::move(s));
      timelines.emplace_back();
    }
    timelines[ut->second].emplace_back(e.timestamp, it->second);
    ++out.interactions;
  }
  if (out.users.empty()) throw DataError("no users survive preprocessing");

  for (std::size_t u = 0; u < out.users.size(); ++u) {
    auto& tl = timelines[u];
    std::stable_sort(tl.begin(), tl.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& items = out.users[u].items;
    items.reserve(tl.size());
    for (const auto& [_, item] : tl) items.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------- split / label

UserSplit split_users(std::vector<UserSequence> users, double existing_fraction,
                      std::uint64_t seed) {
  if (!(existing_fraction > 0 && existing_fraction <= 1)) {
    throw ConfigError("existing fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> order(users.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, kStreamSplit);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  const auto n_existing = static_cast<std::size_t>(
      std::llround(existing_fraction * static_cast<double>(users.size())));
  std::vector<char> is_existing(users.size(), 0);
  for (std::size_t i = 0; i < n_existing; ++i) is_existing[order[i]] = 1;

  UserSplit split;
  for (std::size_t u = 0; u < users.size(); ++u) {
    UserSequence& s = users[u];
    if (s.items.size() < 2) throw DataError("user '" + s.id + "' has fewer than two items");
    HeldOutUser h;
    h.target = s.items.back();
    s.items.pop_back();
    s.cohort = is_existing[u] ? Cohort::Existing : Cohort::New;
    h.prefix = std::move(s);
    (is_existing[u] ? split.existing : split.fresh).push_back(std::move(h));
  }
  return split;
}

std::size_t head_count(std::size_t users, double head_fraction) {
  if (!(head_fraction > 0 && head_fraction < 1)) {
    throw ConfigError("head fraction must lie in (0, 1)");
  }
  const double raw = head_fraction * static_cast<double>(users);
  return std::min(users, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

void head_tail_label(std::vector<HeldOutUser>& users, double head_fraction) {
  const std::size_t heads = head_count(users.size(), head_fraction);
  std::vector<std::size_t> order(users.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto na = users[a].prefix.items.size();
    const auto nb = users[b].prefix.items.size();
    if (na != nb) return na > nb;
    return users[a].prefix.index < users[b].prefix.index;
  });
  for (std::size_t r = 0; r < order.size(); ++r) users[order[r]].prefix.label = r < heads ? 1 : 0;
}

// ---------------------------------------------------------------- tasks

std::pair<std::size_t, std::size_t> task_target_range(std::size_t n, std::size_t window) {
  if (window == 0) throw ConfigError("window length must be positive");
  if (n > window) return {window + 1, n};
  if (n >= 2) return {2, n};
  return {1, 0};  // empty
}

void window_before(std::span<const ItemId> seq, std::size_t t, std::size_t window, ItemId* out) {
  // items at 1-based positions t-L .. t-1
  for (std::size_t j = 0; j < window; ++j) {
    const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(window) +
                               static_cast<std::ptrdiff_t>(j);  // 1-based
    out[j] = pos >= 1 ? seq[static_cast<std::size_t>(pos - 1)] : kPadding;
  }
}

std::vector<TaskWindow> build_tasks(const UserSequence& seq, std::size_t window) {
  const auto [first, last] = task_target_range(seq.items.size(), window);
  std::vector<TaskWindow> tasks;
  for (std::size_t t = first; t <= last; ++t) {
    TaskWindow w;
    w.input.resize(window);
    window_before(seq.items, t, window, w.input.data());
    w.target = seq.items[t - 1];
    w.user = seq.index;
    tasks.push_back(std::move(w));
  }
  return tasks;
}

std::vector<ItemId> sample_negatives(std::span<const ItemId> seen, std::size_t num_items,
                                     std::size_t count, Rng& rng) {
  std::vector<ItemId> out;
  if (count == 0) return out;
  const auto in_seen = [&](ItemId it) { return std::binary_search(seen.begin(), seen.end(), it); };
  std::size_t seen_real = 0;
  for (ItemId it : seen) seen_real += (it >= 1 && it <= num_items);
  const std::size_t eligible = num_items - std::min(num_items, seen_real);
  if (eligible == 0) throw DataError("no negative items: user has interacted with every item");

  out.reserve(count);
  if (eligible * 4 >= num_items) {
    while (out.size() < count) {
      const auto it = static_cast<ItemId>(1 + uniform_index(rng, num_items));
      if (!in_seen(it)) out.push_back(it);
    }
  } else {
    std::vector<ItemId> pool;
    pool.reserve(eligible);
    for (ItemId it = 1; it <= num_items; ++it) {
      if (!in_seen(it)) pool.push_back(it);
    }
    for (std::size_t i = 0; i < count; ++i) out.push_back(pool[uniform_index(rng, pool.size())]);
  }
  return out;
}

// ---------------------------------------------------------------- bundle

namespace {

UserRecord to_record(HeldOutUser&& h) {
  UserRecord r;
  r.index = h.prefix.index;
  r.id = std::move(h.prefix.id);
  r.history = std::move(h.prefix.items);
  r.target = h.target;
  r.label = h.prefix.label;
  r.cohort = h.prefix.cohort;
  r.seen = r.history;
  std::sort(r.seen.begin(), r.seen.end());
  r.seen.erase(std::unique(r.seen.begin(), r.seen.end()), r.seen.end());
  return r;
}

}  // namespace

DatasetBundle make_bundle(const Preprocessed& pre, const DataOptions& opts) {
  UserSplit split = split_users(pre.users, opts.existing_fraction, opts.split_seed);
  head_tail_label(split.existing, opts.head_fraction);
  if (!split.fresh.empty()) head_tail_label(split.fresh, opts.head_fraction);
  DatasetBundle b;
  b.vocab = pre.vocab;
  b.interactions = pre.interactions;
  for (auto& h : split.existing) b.existing.push_back(to_record(std::move(h)));
  for (auto& h : split.fresh) b.fresh.push_back(to_record(std::move(h)));
  return b;
}

std::uint64_t fnv1a(std::span<const char> bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t dataset_key(const std::filesystem::path& tsv, const DataOptions& opts) {
  std::ifstream in(tsv, std::ios::binary);
  if (!in) throw DataError("cannot open " + tsv.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 16);
  while (in.read(buf.data(), static_cast<std::streamsize>(buf.size())) || in.gcount() > 0) {
    h = fnv1a(std::span<const char>(buf.data(), static_cast<std::size_t>(in.gcount())), h);
  }
  char cfg[256];
  const int n = std::snprintf(cfg, sizeof(cfg), "|%.17g|%.17g|%llu|%zu|%zu", opts.existing_fraction,
                              opts.head_fraction, static_cast<unsigned long long>(opts.split_seed),
                              opts.preprocess.min_item_records, opts.preprocess.min_user_feedbacks);
  return fnv1a(std::span<const char>(cfg, static_cast<std::size_t>(n)), h);
}

namespace {

constexpr std::uint32_t kBundleVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  put_u32(os, static_cast<std::uint32_t>(v));
  put_u32(os, static_cast<std::uint32_t>(v >> 32));
}

void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

struct Reader {
  std::istream& is;
  const std::filesystem::path& path;

  std::uint32_t u32() {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw DataError(path.string() + " is truncated");
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | static_cast<std::uint64_t>(u32()) << 32;
  }
  std::string str() {
    std::string s(u32(), '\0');
    if (!is.read(s.data(), static_cast<std::streamsize>(s.size()))) {
      throw DataError(path.string() + " is truncated");
    }
    return s;
  }
};

void put_users(std::ostream& os, const std::vector<UserRecord>& users) {
  put_u64(os, users.size());
  for (const auto& u : users) {
    put_u32(os, u.index);
    put_str(os, u.id);
    put_u64(os, u.history.size());
    for (ItemId it : u.history) put_u32(os, it);
    put_u32(os, u.target);
    put_u32(os, static_cast<std::uint32_t>(u.label));
    put_u32(os, static_cast<std::uint32_t>(u.cohort));
  }
}

std::vector<UserRecord> get_users(Reader& r) {
  std::vector<UserRecord> users(r.u64());
  for (auto& u : users) {
    u.index = r.u32();
    u.id = r.str();
    u.history.resize(r.u64());
    for (auto& it : u.history) it = r.u32();
    u.target = r.u32();
    u.label = static_cast<int>(r.u32());
    u.cohort = static_cast<Cohort>(r.u32());
    u.seen = u.history;
    std::sort(u.seen.begin(), u.seen.end());
    u.seen.erase(std::unique(u.seen.begin(), u.seen.end()), u.seen.end());
  }
  return users;
}

}  // namespace

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& path) {
  const auto tmp = temp_sibling(path);
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write " + tmp.string());
    os.write("LTDS", 4);
    put_u32(os, kBundleVersion);
    put_u64(os, bundle.content_hash);
    put_u64(os, bundle.interactions);
    put_u64(os, bundle.vocab.size());
    for (const auto& id : bundle.vocab.ids) put_str(os, id);
    put_users(os, bundle.existing);
    put_users(os, bundle.fresh);
    if (!os) throw DataError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

DatasetBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::string_view(magic, 4) != "LTDS") {
    throw DataError(path.string() + " is not a dataset cache");
  }
  Reader r{is, path};
  if (r.u32() != kBundleVersion) throw DataError(path.string() + ": unsupported cache version");
  DatasetBundle b;
  b.content_hash = r.u64();
  b.interactions = r.u64();
  b.vocab.ids.resize(r.u64());
  for (auto& id : b.vocab.ids) id = r.str();
  b.existing = get_users(r);
  b.fresh = get_users(r);
  return b;
}

DatasetBundle prepare_dataset(const std::filesystem::path& tsv, const DataOptions& opts,
                              const std::filesystem::path& cache_dir) {
  const std::uint64_t key = dataset_key(tsv, opts);
  std::filesystem::path cache;
  if (!cache_dir.empty()) {
    char name[64];
    std::snprintf(name, sizeof(name), "dataset_%016llx.bin", static_cast<unsigned long long>(key));
    cache = cache_dir / name;
    if (std::filesystem::exists(cache)) {
      DatasetBundle b = load_bundle(cache);
      if (b.content_hash == key) return b;
    }
  }
  DatasetBundle b = make_bundle(preprocess(parse_interactions(tsv), opts.preprocess), opts);
  b.content_hash = key;
  if (!cache.empty()) {
    std::filesystem::create_directories(cache_dir);
    save_bundle(b, cache);
  }
  return b;
}

}  // namespace ltap::data
