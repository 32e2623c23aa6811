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

#include "ltap/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "ltap/error.hpp"
#include "ltap/synth.hpp"
#include "ltap/verify.hpp"

#ifndef LTAP_BUILD_ID
#define LTAP_BUILD_ID "unknown"
#endif

namespace ltap::app {

const char* build_id() { return LTAP_BUILD_ID; }

namespace fs = std::filesystem;

// ---------------------------------------------------------------- checkpoint

void save_model(const Checkpoint& ckpt, const fs::path& path) {
  ParamSet all = ckpt.model.predictor;
  all.merge(ckpt.model.discriminator);
  Tensor vocab({5});
  vocab[0] = static_cast<double>(ckpt.num_items);
  for (int i = 0; i < 4; ++i) {
    vocab[1 + i] = static_cast<double>((ckpt.vocab_fingerprint >> (16 * i)) & 0xFFFF);
  }
  all.set("meta.vocab", vocab);
  all.set("meta.window", Tensor({1}, {static_cast<double>(ckpt.window)}));
  save_checkpoint(all, path);
}

Checkpoint load_model(const fs::path& path) {
  ParamSet all = load_checkpoint(path);
  if (!all.contains("meta.vocab") || !all.contains("meta.window")) {
    throw DataError(path.string() + " is not a model checkpoint (missing meta tensors)");
  }
  Checkpoint c;
  const Tensor& vocab = all.at("meta.vocab");
  if (vocab.size() != 5) throw DataError(path.string() + ": malformed meta.vocab");
  c.num_items = static_cast<std::size_t>(vocab[0]);
  for (int i = 0; i < 4; ++i) {
    c.vocab_fingerprint |= static_cast<std::uint64_t>(vocab[1 + i]) << (16 * i);
  }
  c.window = static_cast<std::size_t>(all.at("meta.window")[0]);
  bool gru = false, att = false;
  for (const auto& [name, t] : all) {
    if (name.rfind("meta.", 0) == 0) continue;
    if (name.rfind("disc.", 0) == 0) {
      c.model.discriminator.set(name, t);
      continue;
    }
    gru = gru || name.rfind("gru.", 0) == 0;
    att = att || name.rfind("att.", 0) == 0;
    c.model.predictor.set(name, t);
  }
  if (gru == att) throw DataError(path.string() + ": cannot tell the encoder kind");
  c.model.encoder = gru ? enc::EncoderKind::Recurrent : enc::EncoderKind::Attention;
  return c;
}

void check_compatible(const Checkpoint& ckpt, const data::DatasetBundle& data) {
  if (ckpt.num_items != data.num_items() || ckpt.vocab_fingerprint != data.vocab.fingerprint() ||
      enc::num_items(ckpt.model.predictor) != data.num_items()) {
    throw DataError("checkpoint vocabulary (" + std::to_string(ckpt.num_items) +
                    " items) does not match the dataset vocabulary (" +
                    std::to_string(data.num_items()) + " items)");
  }
}

// ---------------------------------------------------------------- training

align::Model train_model(const RunConfig& cfg, align::Mode mode, const data::DatasetBundle& data,
                         std::ostream* log) {
  align::Trainer trainer(cfg.trainer, mode, data);
  if (log) align::write_log_header(*log);
  trainer.run([&](const align::IterationLog& row) {
    if (log) align::write_log_row(*log, row);
  });
  return trainer.model();
}

std::vector<AblationRun> run_ablation(const RunConfig& cfg, const data::DatasetBundle& data,
                                      const std::string& sweep, const std::vector<double>& values,
                                      std::size_t repeats, std::ostream* progress) {
  if (values.empty()) throw ConfigError("ablation needs at least one sweep value");
  if (sweep != "k" && sweep != "lambda") {
    throw ConfigError("unknown sweep '" + sweep + "' (expected k or lambda)");
  }
  if (repeats == 0) throw ConfigError("repeats must be >= 1");
  std::vector<AblationRun> runs;
  for (double value : values) {
    RunConfig point = cfg;
    if (sweep == "k") {
      if (value < 1 || value != std::floor(value)) throw ConfigError("k values must be integers >= 1");
      point.trainer.k = static_cast<std::size_t>(value);
    } else {
      point.trainer.lambda = value;
    }
    for (std::size_t r = 0; r < repeats; ++r) {
      point.trainer.seed = cfg.trainer.seed + r;
      align::Trainer trainer(point.trainer, align::Mode::Tp, data);
      std::vector<double> acc;
      trainer.run([&](const align::IterationLog& row) { acc.push_back(row.disc_accuracy); });
      const std::size_t tail = std::max<std::size_t>(1, acc.size() / 10);

      AblationRun run;
      run.value = value;
      run.seed = point.trainer.seed;
      run.disc_accuracy =
          std::accumulate(acc.end() - static_cast<std::ptrdiff_t>(tail), acc.end(), 0.0) /
          static_cast<double>(tail);
      const auto report = eval::summarize(
          {eval::rank_users(trainer.model(), data, point.trainer.window)}, {10});
      run.tail_hr = report.has("tail") ? report.at("tail", 10, "HR").mean : 0.0;
      run.head_hr = report.has("head") ? report.at("head", 10, "HR").mean : 0.0;
      run.all_hr = report.at("all", 10, "HR").mean;
      run.all_ndcg = report.at("all", 10, "NDCG").mean;
      eval::ProbeOptions po;
      po.seed = point.trainer.seed;
      run.probe_accuracy =
          eval::probe_head_tail(trainer.model(), trainer.tasks(), point.trainer.window, po)
              .test_accuracy;
      runs.push_back(run);
      if (progress) {
        *progress << sweep << '=' << value << " seed=" << run.seed << " tail_hr10=" << run.tail_hr
                  << " probe=" << run.probe_accuracy << '\n';
      }
    }
  }
  return runs;
}

// ---------------------------------------------------------------- commands

namespace {

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path default_cache_dir() {
  if (const char* dir = std::getenv("LTAP_CACHE_DIR")) return dir;
  if (const char* home = std::getenv("HOME")) return fs::path(home) / ".cache" / "ltap";
  return {};
}

data::DatasetBundle load_dataset(const fs::path& tsv, const RunConfig& cfg, const fs::path& cache,
                                 std::ostream& err) {
  if (!fs::exists(tsv)) throw DataError("dataset " + tsv.string() + " does not exist");
  try {
    return data::prepare_dataset(tsv, cfg.data, cache);
  } catch (const fs::filesystem_error& e) {
    err << "warning: dataset cache unavailable (" << e.what() << "); preprocessing directly\n";
    return data::prepare_dataset(tsv, cfg.data, {});
  }
}

struct Manifest {
  std::vector<std::pair<std::string, std::string>> fields;
  void add(const std::string& k, const std::string& v) { fields.emplace_back(k, v); }
  std::string text(const RunConfig* cfg) const {
    std::ostringstream os;
    for (const auto& [k, v] : fields) os << k << ": " << v << '\n';
    if (cfg) {
      std::istringstream lines(format_config(*cfg));
      std::string line;
      while (std::getline(lines, line)) os << "config." << line << '\n';
    }
    return os.str();
  }
};

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

int cmd_gen_synth(const synth::SynthConfig& sc, const std::string& out_path, std::ostream& out) {
  const auto events = synth::synth_generate(sc);
  const fs::path p(out_path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  synth::write_interactions(p, events);
  out << "wrote " << events.size() << " interactions for " << sc.users << " users to " << out_path
      << " (top-20% share " << synth::top_share(events, 0.2) << ")\n";
  return kExitOk;
}

int cmd_train(RunConfig cfg, const std::string& data_path, align::Mode mode, const fs::path& dir,
              const fs::path& cache, std::ostream& out, std::ostream& err) {
  const std::string started = timestamp_now();
  fs::create_directories(dir);
  const data::DatasetBundle data = load_dataset(data_path, cfg, cache, err);
  std::ostringstream log;
  log << "# manifest: manifest.txt\n";
  const align::Model model = train_model(cfg, mode, data, &log);

  Checkpoint ckpt{model, cfg.trainer.window, data.num_items(), data.vocab.fingerprint()};
  save_model(ckpt, dir / "checkpoint.bin");
  write_atomic(dir / "train_log.csv", log.str());

  Manifest m;
  m.add("command", "train");
  m.add("mode", align::to_string(mode));
  m.add("dataset", data_path);
  m.add("dataset_hash", hex64(data.content_hash));
  m.add("build", build_id());
  m.add("started", started);
  m.add("finished", timestamp_now());
  m.add("outputs", "checkpoint.bin train_log.csv");
  write_atomic(dir / "manifest.txt", m.text(&cfg));
  out << "trained " << align::to_string(mode) << " model for " << cfg.trainer.iterations
      << " iterations on " << data.existing.size() << " users; outputs in " << dir.string() << '\n';
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& data_path,
             const std::vector<std::string>& checkpoints, const fs::path& dir,
             const fs::path& cache, std::ostream& out, std::ostream& err) {
  const std::string started = timestamp_now();
  const data::DatasetBundle data = load_dataset(data_path, cfg, cache, err);
  std::vector<align::Model> models;
  std::size_t window = 0;
  for (const auto& path : checkpoints) {
    Checkpoint c = load_model(path);
    check_compatible(c, data);
    if (window != 0 && c.window != window) throw ConfigError("checkpoints use different windows");
    window = c.window;
    models.push_back(std::move(c.model));
  }
  const eval::CohortReport report = eval::evaluate(models, data, window, cfg.cutoffs);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';

  fs::create_directories(dir);
  std::ostringstream csv;
  csv << "# manifest: manifest.txt\n";
  eval::write_csv(csv, report);
  write_atomic(dir / "report.csv", csv.str());
  eval::print_table(out, report);

  Manifest m;
  m.add("command", "eval");
  m.add("dataset", data_path);
  m.add("dataset_hash", hex64(data.content_hash));
  std::string ck;
  for (const auto& c : checkpoints) ck += (ck.empty() ? "" : " ") + c;
  m.add("checkpoints", ck);
  m.add("build", build_id());
  m.add("started", started);
  m.add("finished", timestamp_now());
  m.add("outputs", "report.csv");
  write_atomic(dir / "manifest.txt", m.text(&cfg));
  return kExitOk;
}

int cmd_ablate(const RunConfig& cfg, const std::string& data_path, const std::string& sweep,
               std::vector<double> values, std::size_t repeats, const fs::path& dir,
               const fs::path& cache, std::ostream& out, std::ostream& err) {
  const std::string started = timestamp_now();
  if (values.empty()) {
    if (sweep == "k") values = {1, 2, 3, 4, 5};
    else if (sweep == "lambda") values = {0, 0.01, 0.1, 1, 10};
  }
  const data::DatasetBundle data = load_dataset(data_path, cfg, cache, err);
  const auto runs = run_ablation(cfg, data, sweep, values, repeats, &err);

  fs::create_directories(dir);
  std::ostringstream per_run, summary;
  per_run << "# manifest: manifest.txt\n"
          << sweep << ",seed,tail_hr10,head_hr10,all_hr10,all_ndcg10,disc_accuracy,probe_accuracy\n";
  summary << "# manifest: manifest.txt\n"
          << sweep << ",repeats,tail_hr10_mean,tail_hr10_std,head_hr10_mean,all_hr10_mean,"
          << "all_ndcg10_mean,disc_accuracy_mean,probe_accuracy_mean\n";
  char buf[256];
  for (const auto& r : runs) {
    std::snprintf(buf, sizeof(buf), "%g,%llu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.value,
                  static_cast<unsigned long long>(r.seed), r.tail_hr, r.head_hr, r.all_hr,
                  r.all_ndcg, r.disc_accuracy, r.probe_accuracy);
    per_run << buf;
  }
  for (double v : values) {
    std::vector<const AblationRun*> rs;
    for (const auto& r : runs) {
      if (r.value == v) rs.push_back(&r);
    }
    auto mean = [&](double AblationRun::*f) {
      double s = 0;
      for (const auto* r : rs) s += r->*f;
      return s / static_cast<double>(rs.size());
    };
    const double tail_mean = mean(&AblationRun::tail_hr);
    double ss = 0;
    for (const auto* r : rs) ss += (r->tail_hr - tail_mean) * (r->tail_hr - tail_mean);
    const double tail_std = rs.size() > 1 ? std::sqrt(ss / static_cast<double>(rs.size() - 1)) : 0.0;
    std::snprintf(buf, sizeof(buf), "%g,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", v, rs.size(),
                  tail_mean, tail_std, mean(&AblationRun::head_hr), mean(&AblationRun::all_hr),
                  mean(&AblationRun::all_ndcg), mean(&AblationRun::disc_accuracy),
                  mean(&AblationRun::probe_accuracy));
    summary << buf;
  }
  write_atomic(dir / "ablation_runs.csv", per_run.str());
  write_atomic(dir / "report.csv", summary.str());
  out << summary.str();

  Manifest m;
  m.add("command", "ablate");
  m.add("sweep", sweep);
  m.add("repeats", std::to_string(repeats));
  m.add("dataset", data_path);
  m.add("dataset_hash", hex64(data.content_hash));
  m.add("build", build_id());
  m.add("started", started);
  m.add("finished", timestamp_now());
  m.add("outputs", "report.csv ablation_runs.csv");
  write_atomic(dir / "manifest.txt", m.text(&cfg));
  return kExitOk;
}

int cmd_verify(std::ostream& out) {
  const auto results = verify::run_all();
  verify::print_results(out, results);
  const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  out << (ok ? "all suites passed\n" : "some suites FAILED\n");
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Long-tail transferable-parameter training for sequential recommenders", "ltap"};
  cli.require_subcommand(1);

  std::string config_path, data_path, out_dir = ".", mode_name = "tp", sweep, cache_dir;
  std::vector<std::string> checkpoints;
  std::vector<double> values;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  synth::SynthConfig sc;
  std::string synth_out;

  auto* gen = cli.add_subcommand("gen-synth", "Generate a synthetic long-tailed corpus (TSV)");
  gen->add_option("--out", synth_out, "Output TSV path")->required();
  gen->add_option("--seed", sc.seed, "Generator seed");
  gen->add_option("--users", sc.users, "Number of users");
  gen->add_option("--items", sc.items, "Number of items");
  gen->add_option("--gamma", sc.gamma, "Pareto exponent of sequence lengths");
  gen->add_option("--sharpness", sc.sharpness, "Cluster transition sharpness");
  gen->add_option("--clusters", sc.clusters, "Item clusters");
  gen->add_option("--rank", sc.rank, "Rank of the cluster transition logits");
  gen->add_option("--min-len", sc.min_len, "Minimum sequence length");
  gen->add_option("--max-len", sc.max_len, "Maximum sequence length");
  gen->add_option("--length-scale", sc.length_scale, "Scale of the length tail");
  gen->add_option("--zipf", sc.zipf, "Within-cluster Zipf exponent for the shortest users");
  gen->add_option("--niche-shift", sc.niche_shift, "How much flatter long users' Zipf laws are");
  gen->add_option("--stay", sc.stay, "Probability of staying in the current cluster");
  gen->add_option("--min-item-records", sc.min_item_records,
                  "Items drawn fewer times are folded into a popular item");

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", config_path, "key=value config file");
    if (need_config) c->required();
    sub->add_option("--data", data_path, "Interaction TSV")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--cache-dir", cache_dir, "Prepared-dataset cache (default $LTAP_CACHE_DIR or ~/.cache/ltap)");
  };
  auto* train = cli.add_subcommand("train", "Train a model");
  add_common(train, true);
  train->add_option("--mode", mode_name, "joint or tp")->check(CLI::IsMember({"joint", "tp"}));
  auto* train_seed = train->add_option("--seed", seed, "Training seed (overrides config)");

  auto* evalc = cli.add_subcommand("eval", "Evaluate checkpoints on a dataset");
  add_common(evalc, false);
  evalc->add_option("--checkpoint", checkpoints, "Checkpoint(s); one repetition each")->required();

  auto* ablate = cli.add_subcommand("ablate", "Sweep k or lambda");
  add_common(ablate, true);
  ablate->add_option("--sweep", sweep, "k or lambda")->required()->check(CLI::IsMember({"k", "lambda"}));
  ablate->add_option("--values", values, "Grid points (default: the standard grid)")->delimiter(',');
  ablate->add_option("--repeats", repeats, "Training seeds per grid point");
  auto* ablate_seed = ablate->add_option("--seed", seed, "First training seed (overrides config)");

  auto* verifyc = cli.add_subcommand("verify", "Run the verification suites");

  std::vector<const char*> argv;
  argv.push_back("ltap");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    cli.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const fs::path cache = cache_dir.empty() ? default_cache_dir() : fs::path(cache_dir);
    if (*gen) return cmd_gen_synth(sc, synth_out, out);
    if (*verifyc) return cmd_verify(out);
    RunConfig cfg = config_or_default(config_path);
    if (*train) {
      if (*train_seed) cfg.trainer.seed = seed;
      return cmd_train(cfg, data_path, align::parse_mode(mode_name), out_dir, cache, out, err);
    }
    if (*evalc) return cmd_eval(cfg, data_path, checkpoints, out_dir, cache, out, err);
    if (*ablate) {
      if (*ablate_seed) cfg.trainer.seed = seed;
      if (ablate->count("--values") && values.empty()) {
        throw ConfigError("empty sweep list");
      }
      return cmd_ablate(cfg, data_path, sweep, values, repeats, out_dir, cache, out, err);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ltap::app
