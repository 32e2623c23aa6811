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

#include "ltap/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ltap/error.hpp"

namespace ltap {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a non-negative integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  trainer.validate();
  if (!(data.existing_fraction > 0 && data.existing_fraction <= 1)) {
    throw ConfigError("existing_fraction must lie in (0, 1]");
  }
  if (cutoffs.empty() || *std::min_element(cutoffs.begin(), cutoffs.end()) == 0) {
    throw ConfigError("cutoffs must be a non-empty list of positive integers");
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "alpha", "batch_size", "beta", "cutoffs", "data_seed", "dim", "disc_hidden", "encoder",
      "existing_fraction", "head_fraction", "iterations", "k", "lambda", "min_item_records",
      "min_user_feedbacks", "negatives", "outer", "seed", "train_discriminator", "window"};
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto& t = cfg.trainer;
  if (key == "alpha") t.alpha = to_double(key, value);
  else if (key == "beta") t.beta = to_double(key, value);
  else if (key == "k") t.k = to_uint(key, value);
  else if (key == "lambda") t.lambda = to_double(key, value);
  else if (key == "batch_size") t.batch_size = to_uint(key, value);
  else if (key == "window") t.window = to_uint(key, value);
  else if (key == "negatives") t.negatives = to_uint(key, value);
  else if (key == "dim") t.dim = to_uint(key, value);
  else if (key == "encoder") t.encoder = enc::parse_encoder_kind(value);
  else if (key == "iterations") t.iterations = to_uint(key, value);
  else if (key == "seed") t.seed = to_uint(key, value);
  else if (key == "disc_hidden") t.disc_hidden = to_uint(key, value);
  else if (key == "outer") t.outer = align::parse_outer(value);
  else if (key == "train_discriminator") t.train_discriminator = to_bool(key, value);
  else if (key == "head_fraction") {
    t.head_fraction = to_double(key, value);
    cfg.data.head_fraction = t.head_fraction;
  } else if (key == "existing_fraction") cfg.data.existing_fraction = to_double(key, value);
  else if (key == "data_seed") cfg.data.split_seed = to_uint(key, value);
  else if (key == "min_item_records") cfg.data.preprocess.min_item_records = to_uint(key, value);
  else if (key == "min_user_feedbacks") cfg.data.preprocess.min_user_feedbacks = to_uint(key, value);
  else if (key == "cutoffs") {
    cfg.cutoffs.clear();
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) cfg.cutoffs.push_back(to_uint(key, trim(part)));
  } else {
    std::string valid;
    for (const auto& k : config_keys()) valid += (valid.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config key '" + key + "'; valid keys: " + valid);
  }
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set_config_value(cfg, trim(std::string_view(body).substr(0, eq)),
                       trim(std::string_view(body).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

std::string format_config(const RunConfig& cfg) {
  const auto& t = cfg.trainer;
  std::ostringstream os;
  os << "alpha = " << fmt(t.alpha) << '\n'
     << "batch_size = " << t.batch_size << '\n'
     << "beta = " << fmt(t.beta) << '\n';
  os << "cutoffs = ";
  for (std::size_t i = 0; i < cfg.cutoffs.size(); ++i) os << (i ? "," : "") << cfg.cutoffs[i];
  os << '\n'
     << "data_seed = " << cfg.data.split_seed << '\n'
     << "dim = " << t.dim << '\n'
     << "disc_hidden = " << t.disc_hidden << '\n'
     << "encoder = " << enc::to_string(t.encoder) << '\n'
     << "existing_fraction = " << fmt(cfg.data.existing_fraction) << '\n'
     << "head_fraction = " << fmt(t.head_fraction) << '\n'
     << "iterations = " << t.iterations << '\n'
     << "k = " << t.k << '\n'
     << "lambda = " << fmt(t.lambda) << '\n'
     << "min_item_records = " << cfg.data.preprocess.min_item_records << '\n'
     << "min_user_feedbacks = " << cfg.data.preprocess.min_user_feedbacks << '\n'
     << "negatives = " << t.negatives << '\n'
     << "outer = " << align::to_string(t.outer) << '\n'
     << "seed = " << t.seed << '\n'
     << "train_discriminator = " << (t.train_discriminator ? "true" : "false") << '\n'
     << "window = " << t.window << '\n';
  return os.str();
}

}  // namespace ltap
