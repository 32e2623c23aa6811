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

#include "ltap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "ltap/error.hpp"

namespace ltap::eval {

std::size_t rank_target(std::span<const double> scores, ItemId target) {
  if (target == kPadding) throw DataError("rank_target: padding item is not a valid target");
  if (target > scores.size()) {
    throw DataError("rank_target: target " + std::to_string(target) + " outside " +
                    std::to_string(scores.size()) + " items");
  }
  const std::size_t t = target - 1;
  const double s = scores[t];
  std::size_t rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > s || (scores[i] == s && i < t)) ++rank;
  }
  return rank;
}

double hit_ratio(std::span<const std::size_t> ranks, std::size_t cutoff) {
  if (ranks.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r : ranks) hits += r <= cutoff;
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double ndcg(std::span<const std::size_t> ranks, std::size_t cutoff) {
  if (ranks.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t r : ranks) {
    if (r <= cutoff) total += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  }
  return total / static_cast<double>(ranks.size());
}

std::size_t eval_threads() {
  if (const char* env = std::getenv("LT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    throw ConfigError("LT_THREADS must be a positive integer, got '" + std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<UserRank> rank_users(const align::Model& model, const data::DatasetBundle& data,
                                 std::size_t window, std::size_t threads) {
  std::vector<const data::UserRecord*> users;
  for (const auto& u : data.existing) users.push_back(&u);
  for (const auto& u : data.fresh) users.push_back(&u);
  const std::size_t items = enc::num_items(model.predictor);
  if (items != data.num_items()) {
    throw DataError("model has " + std::to_string(items) + " items, dataset has " +
                    std::to_string(data.num_items()));
  }
  if (threads == 0) threads = eval_threads();

  const auto encoder = enc::make_encoder(model.encoder);
  const Tensor& table = model.predictor.at(enc::kItemTable);
  std::vector<UserRank> out(users.size());
  constexpr std::size_t kChunk = 128;
  const std::size_t chunks = (users.size() + kChunk - 1) / kChunk;

  auto work = [&](std::size_t worker) {
    std::vector<ItemId> windows;
    for (std::size_t c = worker; c < chunks; c += threads) {
      const std::size_t lo = c * kChunk;
      const std::size_t hi = std::min(users.size(), lo + kChunk);
      windows.assign((hi - lo) * window, kPadding);
      for (std::size_t i = lo; i < hi; ++i) {
        const auto& h = users[i]->history;
        data::window_before(h, h.size() + 1, window, windows.data() + (i - lo) * window);
      }
      const Tensor emb = enc::encode_values(*encoder, model.predictor, windows, window);
      const Tensor scores = enc::score_all(emb, table);
      for (std::size_t i = lo; i < hi; ++i) {
        const std::span<const double> row(scores.data() + (i - lo) * items, items);
        out[i] = {users[i]->index, rank_target(row, users[i]->target), users[i]->label,
                  users[i]->cohort};
      }
    }
  };
  threads = std::min(threads, std::max<std::size_t>(1, chunks));
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

const std::vector<std::string>& cohort_names() {
  static const std::vector<std::string> names = {
      "all", "head", "tail", "existing", "new",
      "existing-head", "existing-tail", "new-head", "new-tail"};
  return names;
}

bool in_cohort(const UserRank& r, const std::string& cohort) {
  const bool head = r.label == 1;
  const bool existing = r.cohort == data::Cohort::Existing;
  if (cohort == "all") return true;
  if (cohort == "head") return head;
  if (cohort == "tail") return !head;
  if (cohort == "existing") return existing;
  if (cohort == "new") return !existing;
  if (cohort == "existing-head") return existing && head;
  if (cohort == "existing-tail") return existing && !head;
  if (cohort == "new-head") return !existing && head;
  if (cohort == "new-tail") return !existing && !head;
  throw ConfigError("unknown cohort '" + cohort + "'");
}

const MetricRow& CohortReport::at(const std::string& cohort, std::size_t cutoff,
                                  const std::string& metric) const {
  for (const auto& r : rows) {
    if (r.cohort == cohort && r.cutoff == cutoff && r.metric == metric) return r;
  }
  throw std::out_of_range("no report row for " + cohort + " " + metric + "@" +
                          std::to_string(cutoff));
}

bool CohortReport::has(const std::string& cohort) const {
  return std::any_of(rows.begin(), rows.end(), [&](const MetricRow& r) { return r.cohort == cohort; });
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  sd = 0.0;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
}

}  // namespace

CohortReport summarize(const std::vector<std::vector<UserRank>>& repetitions,
                       std::vector<std::size_t> cutoffs) {
  if (repetitions.empty()) throw ConfigError("evaluation needs at least one repetition");
  if (cutoffs.empty()) throw ConfigError("evaluation needs at least one cutoff");
  std::sort(cutoffs.begin(), cutoffs.end());
  cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
  if (cutoffs.front() == 0) throw ConfigError("cutoffs must be positive");

  CohortReport report;
  report.cutoffs = cutoffs;
  report.repetitions = repetitions.size();
  for (const std::string& cohort : cohort_names()) {
    std::vector<std::vector<std::size_t>> ranks(repetitions.size());
    for (std::size_t r = 0; r < repetitions.size(); ++r) {
      for (const auto& u : repetitions[r]) {
        if (in_cohort(u, cohort)) ranks[r].push_back(u.rank);
      }
    }
    if (ranks.front().empty()) {
      report.warnings.push_back("cohort '" + cohort + "' is empty; omitted");
      continue;
    }
    for (std::size_t n : cutoffs) {
      for (const char* metric : {"HR", "NDCG"}) {
        std::vector<double> per_rep;
        for (const auto& rr : ranks) {
          per_rep.push_back(std::string_view(metric) == "HR" ? hit_ratio(rr, n) : ndcg(rr, n));
        }
        MetricRow row{cohort, n, metric, 0.0, 0.0, ranks.front().size()};
        mean_std(per_rep, row.mean, row.std);
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

CohortReport evaluate(std::span<const align::Model> models, const data::DatasetBundle& data,
                      std::size_t window, std::vector<std::size_t> cutoffs, std::size_t threads) {
  std::vector<std::vector<UserRank>> reps;
  for (const auto& m : models) reps.push_back(rank_users(m, data, window, threads));
  return summarize(reps, std::move(cutoffs));
}

void write_csv(std::ostream& out, const CohortReport& report) {
  out << "cohort,cutoff,metric,mean,std,n\n";
  char buf[64];
  for (const auto& r : report.rows) {
    out << r.cohort << ',' << r.cutoff << ',' << r.metric << ',';
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,", r.mean, r.std);
    out << buf << r.n << '\n';
  }
}

void print_table(std::ostream& out, const CohortReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-14s %6s %-5s %10s %10s %7s\n", "cohort", "cutoff", "metric",
                "mean", "std", "n");
  out << buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%-14s %6zu %-5s %10.6f %10.6f %7zu\n", r.cohort.c_str(),
                  r.cutoff, r.metric.c_str(), r.mean, r.std, r.n);
    out << buf;
  }
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
}

// ---------------------------------------------------------------- probe

ProbeResult probe_head_tail(const align::Model& model, const std::vector<align::UserTask>& tasks,
                            std::size_t window, const ProbeOptions& opts) {
  Rng rng = make_rng(opts.seed, kStreamProbe);
  std::vector<std::size_t> heads, tails;
  for (std::size_t i = 0; i < tasks.size(); ++i) (tasks[i].label == 1 ? heads : tails).push_back(i);
  const std::size_t per_class = std::min(heads.size(), tails.size());
  if (per_class < 2) throw DataError("probe needs at least two users of each class");

  auto shuffle = [&](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
  };
  shuffle(heads);
  shuffle(tails);
  heads.resize(per_class);
  tails.resize(per_class);
  const std::size_t n_test = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(opts.test_fraction * static_cast<double>(per_class))), 1,
      per_class - 1);

  std::vector<ItemId> train_win, test_win;
  std::vector<double> train_sign, test_sign;
  auto add_user = [&](std::size_t t, bool test) {
    const auto& ws = tasks[t].windows;
    std::vector<std::size_t> idx(ws.size());
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(idx);
    const std::size_t take = std::min(opts.windows_per_user, idx.size());
    for (std::size_t j = 0; j < take; ++j) {
      auto& dst = test ? test_win : train_win;
      dst.insert(dst.end(), ws[idx[j]].input.begin(), ws[idx[j]].input.end());
      (test ? test_sign : train_sign).push_back(tasks[t].label == 1 ? 1.0 : -1.0);
    }
  };
  for (std::size_t i = 0; i < per_class; ++i) {
    add_user(heads[i], i < n_test);
    add_user(tails[i], i < n_test);
  }

  const auto encoder = enc::make_encoder(model.encoder);
  const Tensor x_train = enc::encode_values(*encoder, model.predictor, train_win, window);
  const Tensor x_test = enc::encode_values(*encoder, model.predictor, test_win, window);
  const std::size_t dim = x_train.cols();
  ParamSet probe = obj::init_discriminator(dim, opts.hidden == 0 ? dim : opts.hidden, rng);

  const Tensor signs({train_sign.size(), 1}, train_sign);
  ParamSet m = probe.zeros_like(), v = probe.zeros_like();
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    ad::Tape tape;
    const ad::BoundParams bound(tape, probe);
    const ad::NodeId z = obj::disc_logits(tape, tape.constant(x_train), bound);
    const ad::NodeId loss = tape.neg(tape.mean(tape.log_sigmoid(tape.mul(z, tape.constant(signs)))));
    const ParamSet g = tape.backward(loss);
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(epoch));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(epoch));
    auto ig = g.begin();
    auto im = m.begin();
    auto iv = v.begin();
    for (auto ip = probe.begin(); ip != probe.end(); ++ip, ++ig, ++im, ++iv) {
      for (std::size_t j = 0; j < ip->second.size(); ++j) {
        const double gj = ig->second[j];
        im->second[j] = b1 * im->second[j] + (1 - b1) * gj;
        iv->second[j] = b2 * iv->second[j] + (1 - b2) * gj * gj;
        ip->second[j] -= opts.learning_rate * (im->second[j] / c1) /
                         (std::sqrt(iv->second[j] / c2) + eps);
      }
    }
  }

  auto accuracy = [&](const Tensor& x, const std::vector<double>& sign) {
    ad::Tape tape;
    const ad::BoundParams bound = obj::bind_constants(tape, probe);
    const Tensor& z = tape.value(obj::disc_logits(tape, tape.constant(x), bound));
    std::size_t ok = 0;
    for (std::size_t i = 0; i < sign.size(); ++i) ok += (z[i] > 0) == (sign[i] > 0);
    return static_cast<double>(ok) / static_cast<double>(sign.size());
  };
  ProbeResult r;
  r.train_accuracy = accuracy(x_train, train_sign);
  r.test_accuracy = accuracy(x_test, test_sign);
  r.train_size = train_sign.size();
  r.test_size = test_sign.size();
  return r;
}

}  // namespace ltap::eval
