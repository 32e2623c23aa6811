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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ltap/align.hpp"
#include "ltap/config.hpp"
#include "ltap/data.hpp"
#include "ltap/eval.hpp"

namespace ltap::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// git-describe style id captured at configure time.
const char* build_id();

/// Model plus what is needed to use it on a dataset.
struct Checkpoint {
  align::Model model;
  std::size_t window = 0;
  std::size_t num_items = 0;
  std::uint64_t vocab_fingerprint = 0;
};

void save_model(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_model(const std::filesystem::path& path);
/// Throws DataError when the checkpoint was trained on another vocabulary.
void check_compatible(const Checkpoint& ckpt, const data::DatasetBundle& data);

/// Trains one model; rows go to `log` (may be null).
align::Model train_model(const RunConfig& cfg, align::Mode mode, const data::DatasetBundle& data,
                         std::ostream* log);

struct AblationRun {
  double value = 0.0;
  std::uint64_t seed = 0;
  double tail_hr = 0.0;  // HR@10 of tail users (existing and new)
  double head_hr = 0.0;
  double all_hr = 0.0;
  double all_ndcg = 0.0;
  double disc_accuracy = 0.0;   // monitor accuracy over the last tenth of training
  double probe_accuracy = 0.0;  // fresh head/tail probe on frozen embeddings
};

/// Trains `repeats` tp-mode models per grid point (seeds seed, seed+1, ...)
/// with `sweep` ("k" or "lambda") set to each value.
std::vector<AblationRun> run_ablation(const RunConfig& cfg, const data::DatasetBundle& data,
                                      const std::string& sweep, const std::vector<double>& values,
                                      std::size_t repeats, std::ostream* progress = nullptr);

/// Full command-line entry point; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ltap::app
