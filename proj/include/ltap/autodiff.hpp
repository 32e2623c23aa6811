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

// Define-by-run reverse-mode differentiation over a tape of dense tensors.
//
// A Tape is built fresh for every forward pass. Nodes are appended in
// evaluation order, so parent indices are always smaller than the child's and
// the graph is acyclic by construction. Every forward op checks that its
// output is finite and throws NonFiniteError otherwise.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ltap/tensor.hpp"

namespace ltap::ad {

enum class OpKind : std::uint8_t {
  Leaf,        // named parameter, gradient accumulated
  Constant,    // no gradient
  MatMul,      // A(m x k) B(k x n)
  MatMulNT,    // A(m x k) B(n x k)^T
  Add,         // same shape, or (m x n) + row vector of n
  Sub,
  Mul,
  Scale,       // A * attrs.scalar
  Sigmoid,
  Tanh,
  Relu,
  Log,
  LogSigmoid,  // log(sigmoid(x)) evaluated stably
  Neg,
  Clamp,       // clamp to [attrs.lo, attrs.hi]
  SoftmaxLast, // softmax over the last axis; attrs.mask marks excluded entries
  Gather,      // rows attrs.indices of a matrix
  Concat,      // along attrs.axis (0 = rows, 1 = columns)
  SliceRows,   // rows [attrs.start, attrs.start + attrs.count)
  Mean,        // scalar mean of all entries
  Sum,         // scalar sum of all entries
  SumLast,     // per-row sum, (m x n) -> (m x 1)
};

const char* op_name(OpKind kind);

struct NodeId {
  std::uint32_t index = UINT32_MAX;
  bool valid() const { return index != UINT32_MAX; }
  bool operator==(const NodeId&) const = default;
};

struct OpAttrs {
  double scalar = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t axis = 0;
  std::size_t start = 0;
  std::size_t count = 0;
  std::vector<std::size_t> indices;
  // Same length as the last axis; nonzero entries are masked out.
  std::vector<std::uint8_t> mask;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// Registers a named parameter. The tensor is referenced, not copied, and
  /// must outlive the tape. Names must be unique within a tape.
  NodeId param(const std::string& name, const Tensor& value);
  NodeId constant(Tensor value);

  /// Generic forward op; throws ShapeError naming the op and input shapes.
  NodeId apply(OpKind kind, std::span<const NodeId> inputs, OpAttrs attrs = {});

  NodeId matmul(NodeId a, NodeId b) { return apply2(OpKind::MatMul, a, b); }
  NodeId matmul_nt(NodeId a, NodeId b) { return apply2(OpKind::MatMulNT, a, b); }
  NodeId add(NodeId a, NodeId b) { return apply2(OpKind::Add, a, b); }
  NodeId sub(NodeId a, NodeId b) { return apply2(OpKind::Sub, a, b); }
  NodeId mul(NodeId a, NodeId b) { return apply2(OpKind::Mul, a, b); }
  NodeId scale(NodeId a, double c);
  NodeId sigmoid(NodeId a) { return apply1(OpKind::Sigmoid, a); }
  NodeId tanh(NodeId a) { return apply1(OpKind::Tanh, a); }
  NodeId relu(NodeId a) { return apply1(OpKind::Relu, a); }
  NodeId log(NodeId a) { return apply1(OpKind::Log, a); }
  NodeId log_sigmoid(NodeId a) { return apply1(OpKind::LogSigmoid, a); }
  NodeId neg(NodeId a) { return apply1(OpKind::Neg, a); }
  NodeId clamp(NodeId a, double lo, double hi);
  NodeId softmax(NodeId a, std::vector<std::uint8_t> mask = {});
  NodeId gather(NodeId table, std::vector<std::size_t> rows);
  NodeId concat(std::span<const NodeId> parts, std::size_t axis);
  NodeId slice_rows(NodeId a, std::size_t start, std::size_t count);
  NodeId mean(NodeId a) { return apply1(OpKind::Mean, a); }
  NodeId sum(NodeId a) { return apply1(OpKind::Sum, a); }
  NodeId sum_last(NodeId a) { return apply1(OpKind::SumLast, a); }

  const Tensor& value(NodeId id) const;
  /// Gradient accumulator of a leaf; zero until backward() runs.
  const Tensor& grad(NodeId id) const;
  OpKind kind(NodeId id) const { return nodes_.at(id.index).op; }
  std::size_t size() const { return nodes_.size(); }

  /// Reverse sweep from a scalar root. Adds d(root)/d(leaf) into each leaf's
  /// accumulator (calling twice accumulates twice) and returns a copy of all
  /// leaf accumulators keyed by parameter name. Leaves the root does not
  /// reach get zero.
  ParamSet backward(NodeId root);

 private:
  struct Node {
    OpKind op = OpKind::Constant;
    std::vector<std::uint32_t> parents;
    Tensor value;
    const Tensor* ref = nullptr;
    std::string name;
    Tensor grad;
    OpAttrs attrs;
    bool requires_grad = false;
  };

  NodeId apply1(OpKind kind, NodeId a);
  NodeId apply2(OpKind kind, NodeId a, NodeId b);
  NodeId push(Node node);
  const Tensor& val(std::uint32_t i) const;
  void backprop_node(std::uint32_t i, std::vector<Tensor>& grads);

  std::vector<Node> nodes_;
  std::map<std::string, std::uint32_t> leaf_names_;
};

/// Parameter name -> leaf node for one tape.
class BoundParams {
 public:
  BoundParams() = default;
  BoundParams(Tape& tape, const ParamSet& params);
  NodeId operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return ids_.count(name) != 0; }
  /// Binds additional parameters, e.g. a second parameter set on the same tape.
  void bind(Tape& tape, const ParamSet& params);
  void add(const std::string& name, NodeId id) { ids_[name] = id; }

 private:
  std::map<std::string, NodeId> ids_;
};

/// Builds a scalar node from parameters. Must register the parameters it
/// uses on the given tape (BoundParams does this for a whole set).
using ScalarFn = std::function<NodeId(Tape&, const ParamSet&)>;

struct GradcheckReport {
  double max_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
};

/// Compares analytic gradients with central differences of step `step` at
/// every coordinate. The error per coordinate is
/// |analytic - numeric| / max(1, |analytic|).
GradcheckReport gradcheck(const ScalarFn& f, const ParamSet& params, double step);

}  // namespace ltap::ad
