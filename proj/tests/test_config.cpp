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

#include <doctest.h>

#include <sstream>

#include "ltap/config.hpp"
#include "ltap/error.hpp"

using namespace ltap;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "run.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST_CASE("parse: values, comments and defaults") {
  const RunConfig c = parse(
      "# comment line\n"
      "alpha = 0.05   # trailing comment\n"
      "k=3\n"
      "\n"
      "encoder = attention\n"
      "outer = sgd\n"
      "cutoffs = 1, 10\n"
      "train_discriminator = false\n"
      "head_fraction = 0.25\n"
      "data_seed = 9\n");
  CHECK(c.trainer.alpha == 0.05);
  CHECK(c.trainer.k == 3);
  CHECK(c.trainer.encoder == enc::EncoderKind::Attention);
  CHECK(c.trainer.outer == align::OuterKind::Sgd);
  CHECK(c.cutoffs == std::vector<std::size_t>{1, 10});
  CHECK(!c.trainer.train_discriminator);
  CHECK(c.trainer.head_fraction == 0.25);
  CHECK(c.data.head_fraction == 0.25);
  CHECK(c.data.split_seed == 9);
  // untouched keys keep their defaults
  CHECK(c.trainer.beta == align::TrainerConfig{}.beta);
  CHECK(c.data.preprocess.min_user_feedbacks == 10);
  CHECK(parse("").cutoffs == std::vector<std::size_t>{5, 10, 20});
}

TEST_CASE("unknown keys are rejected with the list of valid keys") {
  const std::string msg = error_of("alpha_ = 0.1\n");
  CHECK(msg.find("run.cfg:1:") != std::string::npos);
  CHECK(msg.find("'alpha_'") != std::string::npos);
  for (const auto& key : config_keys()) CHECK(msg.find(key) != std::string::npos);
}

TEST_CASE("bad values name the line and key") {
  CHECK(error_of("k = 2\nalpha = fast\n").find("run.cfg:2:") != std::string::npos);
  CHECK(error_of("alpha = fast\n").find("alpha") != std::string::npos);
  CHECK(error_of("k = -1\n") != "no error");
  CHECK(error_of("k = 0\n") != "no error");
  CHECK(error_of("alpha = 0\n") != "no error");
  CHECK(error_of("lambda = -1\n") != "no error");
  CHECK(error_of("just words\n").find("expected key = value") != std::string::npos);
  CHECK(error_of("encoder = cnn\n").find("run.cfg:1:") != std::string::npos);
  CHECK(error_of("cutoffs = \n") != "no error");
  CHECK(error_of("cutoffs = 10,0\n") != "no error");
  CHECK(error_of("existing_fraction = 1.5\n") != "no error");
  CHECK(error_of("train_discriminator = maybe\n") != "no error");
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("format round-trips") {
  RunConfig c;
  c.trainer.alpha = 0.1 + 0.2;  // not exactly representable in short form
  c.trainer.beta = 3e-4;
  c.trainer.lambda = 1.0 / 3.0;
  c.trainer.k = 5;
  c.trainer.encoder = enc::EncoderKind::Attention;
  c.trainer.seed = 123456789012345ULL;
  c.cutoffs = {1, 2, 50};
  c.data.existing_fraction = 0.75;
  const RunConfig back = parse(format_config(c));
  CHECK(format_config(back) == format_config(c));
  CHECK(back.trainer.alpha == c.trainer.alpha);
  CHECK(back.trainer.lambda == c.trainer.lambda);
  CHECK(back.trainer.seed == c.trainer.seed);
  CHECK(back.cutoffs == c.cutoffs);
  // every key appears once in the canonical text
  const std::string text = format_config(c);
  for (const auto& key : config_keys()) CHECK(text.find(key + " = ") != std::string::npos);
}

TEST_CASE("shipped config loads") {
  const RunConfig c = load_config(std::string(LTAP_SOURCE_DIR) + "/configs/synth.cfg");
  CHECK(c.trainer.encoder == enc::EncoderKind::Recurrent);
  CHECK(c.trainer.k == 2);
  CHECK(c.trainer.lambda == 0.1);
}
