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

#include <cmath>
#include <string>

#include "ltap/autodiff.hpp"
#include "ltap/error.hpp"
#include "ltap/verify.hpp"

using namespace ltap;
using ad::NodeId;
using ad::Tape;

TEST_CASE("forward examples") {
  Tape t;
  const NodeId eye = t.constant(Tensor({2, 2}, {1, 0, 0, 1}));
  const NodeId m = t.constant(Tensor({2, 2}, {1, 2, 3, 4}));
  CHECK(t.value(t.matmul(eye, m)).values()[3] == 4.0);
  CHECK(t.value(t.matmul(eye, m)) == t.value(m));
  CHECK(t.value(t.sigmoid(t.constant(Tensor({1}, {0.0}))))[0] == 0.5);
  const Tensor& sm = t.value(t.softmax(t.constant(Tensor({3}, {1, 1, 1}))));
  for (double v : sm.values()) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("backward examples") {
  {
    Tape t;
    const Tensor x({1}, {0.0});
    const NodeId xid = t.param("x", x);
    const ParamSet g = t.backward(t.sum(t.sigmoid(xid)));
    CHECK(g.at("x")[0] == 0.25);
  }
  {
    Tape t;
    const Tensor a({2}, {1, 2}), b({2}, {3, 4});
    const NodeId ai = t.param("a", a), bi = t.param("b", b);
    const ParamSet g = t.backward(t.sum(t.mul(ai, bi)));
    CHECK(g.at("a") == Tensor({2}, {3, 4}));
    CHECK(g.at("b") == Tensor({2}, {1, 2}));
  }
}

TEST_CASE("backward requires a scalar root") {
  Tape t;
  const Tensor a({2}, {1, 2});
  const NodeId ai = t.param("a", a);
  CHECK_THROWS_AS(t.backward(t.neg(ai)), ShapeError);
}

TEST_CASE("backward twice accumulates exactly twice") {
  Tape t;
  const Tensor w({2, 2}, {0.3, -0.1, 0.7, 0.2});
  const Tensor x({1, 2}, {1.5, -2.0});
  const NodeId wi = t.param("w", w);
  const NodeId root = t.mean(t.tanh(t.matmul(t.constant(x), wi)));
  const ParamSet once = t.backward(root);
  const ParamSet twice = t.backward(root);
  for (std::size_t i = 0; i < 4; ++i) CHECK(twice.at("w")[i] == 2.0 * once.at("w")[i]);
  CHECK(t.grad(wi) == twice.at("w"));
}

TEST_CASE("unreachable leaves get zero gradient") {
  Tape t;
  const Tensor a({2}, {1, 2}), b({3}, {1, 2, 3});
  const NodeId ai = t.param("a", a);
  t.param("b", b);
  const ParamSet g = t.backward(t.sum(ai));
  CHECK(g.at("b") == Tensor({3}));
}

TEST_CASE("shape errors name the op and the shapes") {
  Tape t;
  const NodeId a = t.constant(Tensor({2, 3}));
  const NodeId b = t.constant(Tensor({2, 3}));
  try {
    t.matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("[2x3]") != std::string::npos);
  }
  CHECK_THROWS_AS(t.add(a, t.constant(Tensor({4}))), ShapeError);
}

TEST_CASE("non-finite values are errors") {
  Tape t;
  CHECK_THROWS_AS(t.log(t.constant(Tensor({1}, {0.0}))), NonFiniteError);
  CHECK_THROWS_AS(t.log(t.constant(Tensor({1}, {-1.0}))), NonFiniteError);
  const Tensor bad({1}, {std::nan("")});
  CHECK_THROWS_AS(t.param("bad", bad), NonFiniteError);
  CHECK_THROWS_AS(t.scale(t.constant(Tensor({1}, {1e300})), 1e300), NonFiniteError);
}

TEST_CASE("duplicate parameter names are rejected") {
  Tape t;
  const Tensor a({1}, {1.0});
  t.param("a", a);
  CHECK_THROWS(t.param("a", a));
}

TEST_CASE("masked softmax") {
  Tape t;
  const NodeId x = t.constant(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
  const Tensor& y = t.value(t.softmax(x, {0, 1, 0}));
  CHECK(y.at(0, 1) == 0.0);
  CHECK(y.at(0, 0) + y.at(0, 2) == doctest::Approx(1.0));
  CHECK(y.at(1, 2) / y.at(1, 0) == doctest::Approx(std::exp(2.0)));
  const Tensor& z = t.value(t.softmax(x, {1, 1, 1}));
  for (double v : z.values()) CHECK(v == 0.0);
  // max subtraction keeps large logits finite
  const Tensor& big = t.value(t.softmax(t.constant(Tensor({2}, {1000.0, 1000.0}))));
  CHECK(big[0] == 0.5);
}

TEST_CASE("gather backward scatter-adds repeated rows") {
  Tape t;
  const Tensor table({3, 2}, {1, 2, 3, 4, 5, 6});
  const NodeId ti = t.param("table", table);
  const ParamSet g = t.backward(t.sum(t.gather(ti, {2, 0, 2})));
  CHECK(g.at("table") == Tensor({3, 2}, {1, 1, 0, 0, 2, 2}));
}

TEST_CASE("log_sigmoid is stable for large magnitudes") {
  Tape t;
  const Tensor& v = t.value(t.log_sigmoid(t.constant(Tensor({2}, {-800.0, 800.0}))));
  CHECK(v[0] == doctest::Approx(-800.0));
  CHECK(v[1] == 0.0);
}

TEST_CASE("gradcheck examples") {
  ParamSet p;
  p.set("theta", Tensor({1}, {3.0}));
  const ad::ScalarFn square = [](Tape& t, const ParamSet& q) {
    const NodeId x = t.param("theta", q.at("theta"));
    return t.sum(t.mul(x, x));
  };
  CHECK(ad::gradcheck(square, p, 1e-5).max_error < 1e-8);

  const ad::ScalarFn constant = [](Tape& t, const ParamSet& q) {
    t.param("theta", q.at("theta"));
    return t.constant(Tensor::scalar(4.0));
  };
  const auto r = ad::gradcheck(constant, p, 1e-5);
  CHECK(r.max_error == 0.0);
  CHECK(r.coordinates == 1);

  CHECK_THROWS_AS(ad::gradcheck(square, p, 0.0), ConfigError);
  const ad::ScalarFn blows_up = [](Tape& t, const ParamSet& q) {
    const NodeId x = t.param("theta", q.at("theta"));
    return t.sum(t.log(t.sub(x, t.constant(Tensor({1}, {3.0})))));
  };
  CHECK_THROWS_AS(ad::gradcheck(blows_up, p, 1e-5), NonFiniteError);
}

TEST_CASE("every op kind passes central differences on 100 random shapes") {
  const auto r = verify::op_gradcheck_suite(100, 21);
  CAPTURE(r.detail);
  CHECK(r.passed);
  CHECK(r.max_error < 1e-4);
}
