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

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ltap/error.hpp"
#include "ltap/rng.hpp"
#include "ltap/tensor.hpp"

using namespace ltap;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ltap_test_tensor";
  fs::create_directories(dir);
  return dir / name;
}

ParamSet sample_params() {
  ParamSet p;
  p.set("zeta", Tensor({2, 2}, {1, 2, 3, 4}));
  p.set("alpha", Tensor({3}, {0.1, -0.2, 1e-300}));
  p.set("mid", Tensor::scalar(-7.5));
  return p;
}

}  // namespace

TEST_CASE("tensor shape must match the buffer") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  const Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(Tensor::scalar(4).item() == 4.0);
  CHECK_THROWS_AS(t.item(), ShapeError);
  CHECK(shape_str({2, 3}) == "[2x3]");
}

TEST_CASE("flatten orders parameters lexicographically and round-trips bit-exactly") {
  ParamSet p = sample_params();
  const auto flat = p.flatten();
  REQUIRE(flat.size() == 8);
  CHECK(flat[0] == 0.1);   // alpha
  CHECK(flat[3] == -7.5);  // mid
  CHECK(flat[4] == 1.0);   // zeta

  Rng rng = make_rng(1, 0);
  std::vector<double> noise(flat.size());
  for (double& v : noise) v = normal01(rng) * 1e7;
  ParamSet q = p.zeros_like();
  q.unflatten(noise);
  const auto back = q.flatten();
  for (std::size_t i = 0; i < noise.size(); ++i) {
    CHECK(std::bit_cast<std::uint64_t>(back[i]) == std::bit_cast<std::uint64_t>(noise[i]));
  }
  CHECK_THROWS_AS(q.unflatten(std::vector<double>(7)), ShapeError);
}

TEST_CASE("layout helpers") {
  const ParamSet p = sample_params();
  ParamSet q = p.zeros_like();
  CHECK(p.same_layout(q));
  CHECK(q.flatten() == std::vector<double>(8, 0.0));
  q.set("extra", Tensor({1}));
  CHECK_FALSE(p.same_layout(q));
  CHECK_THROWS_AS(require_same_layout(p, q, "test"), ShapeError);
  CHECK(p.num_values() == 8);
  CHECK(l2_norm(p) == doctest::Approx(std::sqrt(0.01 + 0.04 + 56.25 + 30)));
  CHECK(p.with_prefix("z").count() == 1);
}

TEST_CASE("checkpoint round trip and header") {
  const ParamSet p = sample_params();
  const fs::path path = temp_file("ckpt.bin");
  save_checkpoint(p, path);
  CHECK(load_checkpoint(path) == p);

  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "LTAP");
  unsigned char ver[4];
  in.read(reinterpret_cast<char*>(ver), 4);
  CHECK(ver[0] == kCheckpointVersion);
  unsigned char count[4];
  in.read(reinterpret_cast<char*>(count), 4);
  CHECK(count[0] == 3);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const fs::path path = temp_file("bad.bin");
  save_checkpoint(sample_params(), path);
  const auto size = fs::file_size(path);
  fs::resize_file(path, size - 3);
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "NOPE0000";
  }
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  CHECK_THROWS_AS(load_checkpoint(temp_file("missing.bin")), DataError);
}

TEST_CASE("all_finite") {
  const double ok[] = {1.0, -2.0};
  const double bad[] = {1.0, std::numeric_limits<double>::quiet_NaN()};
  const double inf[] = {std::numeric_limits<double>::infinity()};
  CHECK(all_finite(ok));
  CHECK_FALSE(all_finite(bad));
  CHECK_FALSE(all_finite(inf));
}
