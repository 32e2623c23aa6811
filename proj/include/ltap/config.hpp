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

// Flat `key = value` run configuration. One pair per line; '#' starts a
// comment. Unknown keys are rejected.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ltap/align.hpp"
#include "ltap/data.hpp"

namespace ltap {

struct RunConfig {
  align::TrainerConfig trainer;
  data::DataOptions data;
  std::vector<std::size_t> cutoffs = {5, 10, 20};

  void validate() const;
};

const std::vector<std::string>& config_keys();

/// Applies one key to `cfg`; throws ConfigError for unknown keys or bad values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig parse_config(std::istream& in, const std::string& source);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text that parses back to the same config.
std::string format_config(const RunConfig& cfg);

}  // namespace ltap
