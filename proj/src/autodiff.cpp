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

#include "ltap/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ltap/error.hpp"
#include "ltap/kernels.hpp"

namespace ltap::ad {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::Constant: return "constant";
    case OpKind::MatMul: return "matmul";
    case OpKind::MatMulNT: return "matmul_nt";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Scale: return "scale";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::Relu: return "relu";
    case OpKind::Log: return "log";
    case OpKind::LogSigmoid: return "log_sigmoid";
    case OpKind::Neg: return "neg";
    case OpKind::Clamp: return "clamp";
    case OpKind::SoftmaxLast: return "softmax";
    case OpKind::Gather: return "gather";
    case OpKind::Concat: return "concat";
    case OpKind::SliceRows: return "slice_rows";
    case OpKind::Mean: return "mean";
    case OpKind::Sum: return "sum";
    case OpKind::SumLast: return "sum_last";
  }
  return "?";
}

namespace {

double sigmoid_of(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) = -softplus(-x)
double log_sigmoid_of(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

[[noreturn]] void shape_fail(OpKind kind, const std::vector<const Tensor*>& in,
                             const std::string& why) {
  std::ostringstream os;
  os << op_name(kind) << ": " << why << " (input shapes";
  for (const Tensor* t : in) os << ' ' << shape_str(t->shape());
  os << ')';
  throw ShapeError(os.str());
}

bool is_matrix(const Tensor& t) { return t.rank() <= 2; }

Shape matrix_shape(std::size_t r, std::size_t c) { return {r, c}; }

}  // namespace

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Tape::val(std::uint32_t i) const {
  const Node& n = nodes_[i];
  return n.ref != nullptr ? *n.ref : n.value;
}

const Tensor& Tape::value(NodeId id) const {
  if (id.index >= nodes_.size()) throw ShapeError("invalid node id");
  return val(id.index);
}

const Tensor& Tape::grad(NodeId id) const {
  if (id.index >= nodes_.size()) throw ShapeError("invalid node id");
  return nodes_[id.index].grad;
}

NodeId Tape::param(const std::string& name, const Tensor& value) {
  if (leaf_names_.count(name) != 0) throw ShapeError("parameter '" + name + "' bound twice");
  if (!all_finite(value.values())) throw NonFiniteError("parameter '" + name + "' is not finite");
  Node n;
  n.op = OpKind::Leaf;
  n.ref = &value;
  n.name = name;
  n.grad = Tensor(value.shape());
  n.requires_grad = true;
  const NodeId id = push(std::move(n));
  leaf_names_[name] = id.index;
  return id;
}

NodeId Tape::constant(Tensor value) {
  if (!all_finite(value.values())) throw NonFiniteError("constant is not finite");
  Node n;
  n.op = OpKind::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::apply1(OpKind kind, NodeId a) {
  const NodeId in[] = {a};
  return apply(kind, in);
}

NodeId Tape::apply2(OpKind kind, NodeId a, NodeId b) {
  const NodeId in[] = {a, b};
  return apply(kind, in);
}

NodeId Tape::scale(NodeId a, double c) {
  OpAttrs attrs;
  attrs.scalar = c;
  const NodeId in[] = {a};
  return apply(OpKind::Scale, in, std::move(attrs));
}

NodeId Tape::clamp(NodeId a, double lo, double hi) {
  OpAttrs attrs;
  attrs.lo = lo;
  attrs.hi = hi;
  const NodeId in[] = {a};
  return apply(OpKind::Clamp, in, std::move(attrs));
}

NodeId Tape::softmax(NodeId a, std::vector<std::uint8_t> mask) {
  OpAttrs attrs;
  attrs.mask = std::move(mask);
  const NodeId in[] = {a};
  return apply(OpKind::SoftmaxLast, in, std::move(attrs));
}

NodeId Tape::gather(NodeId table, std::vector<std::size_t> rows) {
  OpAttrs attrs;
  attrs.indices = std::move(rows);
  const NodeId in[] = {table};
  return apply(OpKind::Gather, in, std::move(attrs));
}

NodeId Tape::concat(std::span<const NodeId> parts, std::size_t axis) {
  OpAttrs attrs;
  attrs.axis = axis;
  return apply(OpKind::Concat, parts, std::move(attrs));
}

NodeId Tape::slice_rows(NodeId a, std::size_t start, std::size_t count) {
  OpAttrs attrs;
  attrs.start = start;
  attrs.count = count;
  const NodeId in[] = {a};
  return apply(OpKind::SliceRows, in, std::move(attrs));
}

NodeId Tape::apply(OpKind kind, std::span<const NodeId> inputs, OpAttrs attrs) {
  std::vector<const Tensor*> in;
  in.reserve(inputs.size());
  bool requires_grad = false;
  for (NodeId id : inputs) {
    if (id.index >= nodes_.size()) throw ShapeError(std::string(op_name(kind)) + ": invalid input node");
    in.push_back(&val(id.index));
    requires_grad = requires_grad || nodes_[id.index].requires_grad;
  }
  auto arity = [&](std::size_t n) {
    if (in.size() != n) shape_fail(kind, in, "expected " + std::to_string(n) + " inputs");
  };

  Tensor out;
  switch (kind) {
    case OpKind::Leaf:
    case OpKind::Constant:
      throw ShapeError("use Tape::param or Tape::constant for leaves");

    case OpKind::MatMul: {
      arity(2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      if (!is_matrix(a) || !is_matrix(b) || a.cols() != b.rows()) {
        shape_fail(kind, in, "inner dimensions differ");
      }
      out = Tensor(matrix_shape(a.rows(), b.cols()));
      kernels::gemm(a.data(), b.data(), out.data(), a.rows(), a.cols(), b.cols());
      break;
    }
    case OpKind::MatMulNT: {
      arity(2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      if (!is_matrix(a) || !is_matrix(b) || a.cols() != b.cols()) {
        shape_fail(kind, in, "row lengths differ");
      }
      out = Tensor(matrix_shape(a.rows(), b.rows()));
      kernels::gemm_nt(a.data(), b.data(), out.data(), a.rows(), a.cols(), b.rows());
      break;
    }
    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Mul: {
      arity(2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      out = Tensor(a.shape());
      if (a.shape() == b.shape()) {
        if (kind == OpKind::Add) {
          kernels::add(a.data(), b.data(), out.data(), a.size());
        } else if (kind == OpKind::Mul) {
          kernels::mul(a.data(), b.data(), out.data(), a.size());
        } else {
          for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
        }
      } else if (kind == OpKind::Add && is_matrix(a) && b.rank() <= 2 && b.rows() == 1 &&
                 b.size() == a.cols()) {
        for (std::size_t r = 0; r < a.rows(); ++r) {
          kernels::add(a.data() + r * a.cols(), b.data(), out.data() + r * a.cols(), a.cols());
        }
        attrs.axis = 1;  // row broadcast
      } else {
        shape_fail(kind, in, "shapes do not conform");
      }
      break;
    }
    case OpKind::Scale: {
      arity(1);
      out = *in[0];
      for (double& v : out.values()) v *= attrs.scalar;
      break;
    }
    case OpKind::Sigmoid:
    case OpKind::Tanh:
    case OpKind::Relu:
    case OpKind::Log:
    case OpKind::LogSigmoid:
    case OpKind::Neg: {
      arity(1);
      const Tensor& a = *in[0];
      out = Tensor(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i];
        switch (kind) {
          case OpKind::Sigmoid: out[i] = sigmoid_of(x); break;
          case OpKind::Tanh: out[i] = std::tanh(x); break;
          case OpKind::Relu: out[i] = x > 0 ? x : 0.0; break;
          case OpKind::Log:
            if (!(x > 0)) throw NonFiniteError("log of non-positive value " + std::to_string(x));
            out[i] = std::log(x);
            break;
          case OpKind::LogSigmoid: out[i] = log_sigmoid_of(x); break;
          default: out[i] = -x; break;
        }
      }
      break;
    }
    case OpKind::Clamp: {
      arity(1);
      if (!(attrs.lo <= attrs.hi)) shape_fail(kind, in, "empty clamp range");
      out = *in[0];
      for (double& v : out.values()) v = std::clamp(v, attrs.lo, attrs.hi);
      break;
    }
    case OpKind::SoftmaxLast: {
      arity(1);
      const Tensor& a = *in[0];
      const std::size_t n = a.cols();
      if (!attrs.mask.empty() && attrs.mask.size() != n) {
        shape_fail(kind, in, "mask length " + std::to_string(attrs.mask.size()) +
                                 " does not match last axis");
      }
      out = Tensor(a.shape());
      for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* x = a.data() + r * n;
        double* y = out.data() + r * n;
        double mx = -INFINITY;
        for (std::size_t j = 0; j < n; ++j) {
          if (attrs.mask.empty() || !attrs.mask[j]) mx = std::max(mx, x[j]);
        }
        if (mx == -INFINITY) continue;  // everything masked: all-zero weights
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          y[j] = (attrs.mask.empty() || !attrs.mask[j]) ? std::exp(x[j] - mx) : 0.0;
          z += y[j];
        }
        for (std::size_t j = 0; j < n; ++j) y[j] /= z;
      }
      break;
    }
    case OpKind::Gather: {
      arity(1);
      const Tensor& t = *in[0];
      if (!is_matrix(t) || t.rank() != 2) shape_fail(kind, in, "table must be a matrix");
      const std::size_t d = t.cols();
      out = Tensor(matrix_shape(attrs.indices.size(), d));
      for (std::size_t r = 0; r < attrs.indices.size(); ++r) {
        const std::size_t idx = attrs.indices[r];
        if (idx >= t.rows()) {
          shape_fail(kind, in, "row index " + std::to_string(idx) + " out of range");
        }
        std::copy_n(t.data() + idx * d, d, out.data() + r * d);
      }
      break;
    }
    case OpKind::Concat: {
      if (in.empty()) shape_fail(kind, in, "no inputs");
      if (attrs.axis == 0) {
        const std::size_t c = in[0]->cols();
        std::size_t rows = 0;
        for (const Tensor* t : in) {
          if (!is_matrix(*t) || t->cols() != c) shape_fail(kind, in, "column counts differ");
          rows += t->rows();
        }
        out = Tensor(matrix_shape(rows, c));
        std::size_t off = 0;
        for (const Tensor* t : in) {
          std::copy_n(t->data(), t->size(), out.data() + off);
          off += t->size();
        }
      } else if (attrs.axis == 1) {
        const std::size_t r = in[0]->rows();
        std::size_t cols = 0;
        for (const Tensor* t : in) {
          if (!is_matrix(*t) || t->rows() != r) shape_fail(kind, in, "row counts differ");
          cols += t->cols();
        }
        out = in[0]->rank() == 2 ? Tensor(matrix_shape(r, cols)) : Tensor(Shape{cols});
        for (std::size_t row = 0; row < r; ++row) {
          std::size_t off = 0;
          for (const Tensor* t : in) {
            std::copy_n(t->data() + row * t->cols(), t->cols(), out.data() + row * cols + off);
            off += t->cols();
          }
        }
      } else {
        shape_fail(kind, in, "axis must be 0 or 1");
      }
      break;
    }
    case OpKind::SliceRows: {
      arity(1);
      const Tensor& a = *in[0];
      if (!is_matrix(a) || attrs.count == 0 || attrs.start + attrs.count > a.rows()) {
        shape_fail(kind, in, "row range out of bounds");
      }
      const std::size_t c = a.cols();
      out = Tensor(matrix_shape(attrs.count, c));
      std::copy_n(a.data() + attrs.start * c, attrs.count * c, out.data());
      break;
    }
    case OpKind::Mean:
    case OpKind::Sum: {
      arity(1);
      const Tensor& a = *in[0];
      if (a.size() == 0) shape_fail(kind, in, "empty input");
      double s = 0.0;
      for (double v : a.values()) s += v;
      if (kind == OpKind::Mean) s /= static_cast<double>(a.size());
      out = Tensor::scalar(s);
      break;
    }
    case OpKind::SumLast: {
      arity(1);
      const Tensor& a = *in[0];
      if (!is_matrix(a)) shape_fail(kind, in, "input must be a matrix");
      out = Tensor(matrix_shape(a.rows(), 1));
      for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a.at(r, j);
        out[r] = s;
      }
      break;
    }
  }

  if (!all_finite(out.values())) {
    throw NonFiniteError(std::string(op_name(kind)) + " produced a non-finite value");
  }

  Node n;
  n.op = kind;
  n.parents.reserve(inputs.size());
  for (NodeId id : inputs) n.parents.push_back(id.index);
  n.value = std::move(out);
  n.attrs = std::move(attrs);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

ParamSet Tape::backward(NodeId root) {
  if (root.index >= nodes_.size()) throw ShapeError("backward: invalid root");
  if (val(root.index).size() != 1) {
    throw ShapeError("backward: root must be scalar, got shape " +
                     shape_str(val(root.index).shape()));
  }
  std::vector<Tensor> grads(root.index + 1);
  grads[root.index] = Tensor::filled(val(root.index).shape(), 1.0);
  for (std::uint32_t i = root.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || grads[i].size() == 0) continue;
    if (n.op == OpKind::Leaf) {
      if (!all_finite(grads[i].values())) {
        throw NonFiniteError("non-finite gradient for parameter '" + n.name + "'");
      }
      kernels::add(n.grad.data(), grads[i].data(), n.grad.data(), n.grad.size());
      continue;
    }
    backprop_node(i, grads);
    grads[i] = Tensor();
  }

  ParamSet out;
  for (const auto& [name, idx] : leaf_names_) out.set(name, nodes_[idx].grad);
  return out;
}

void Tape::backprop_node(std::uint32_t i, std::vector<Tensor>& grads) {
  const Node& n = nodes_[i];
  const Tensor& g = grads[i];
  const Tensor& y = n.value;

  // Lazily sized accumulator for parent p, or null when p needs no gradient.
  auto acc = [&](std::size_t which) -> Tensor* {
    const std::uint32_t p = n.parents[which];
    if (!nodes_[p].requires_grad) return nullptr;
    if (grads[p].size() == 0) grads[p] = Tensor(val(p).shape());
    return &grads[p];
  };

  switch (n.op) {
    case OpKind::Leaf:
    case OpKind::Constant:
      break;
    case OpKind::MatMul: {
      const Tensor& a = val(n.parents[0]);
      const Tensor& b = val(n.parents[1]);
      const std::size_t m = a.rows(), k = a.cols(), c = b.cols();
      if (Tensor* da = acc(0)) kernels::gemm_nt_acc(g.data(), b.data(), da->data(), m, c, k);
      if (Tensor* db = acc(1)) kernels::gemm_tn_acc(a.data(), g.data(), db->data(), m, k, c);
      break;
    }
    case OpKind::MatMulNT: {
      const Tensor& a = val(n.parents[0]);
      const Tensor& b = val(n.parents[1]);
      const std::size_t m = a.rows(), k = a.cols(), c = b.rows();
      if (Tensor* da = acc(0)) kernels::gemm_acc(g.data(), b.data(), da->data(), m, c, k);
      if (Tensor* db = acc(1)) kernels::gemm_tn_acc(g.data(), a.data(), db->data(), m, c, k);
      break;
    }
    case OpKind::Add:
    case OpKind::Sub: {
      const double sign = n.op == OpKind::Add ? 1.0 : -1.0;
      if (Tensor* da = acc(0)) kernels::axpy(1.0, g.data(), da->data(), g.size());
      if (Tensor* db = acc(1)) {
        if (n.attrs.axis == 1) {
          const std::size_t c = db->size();
          for (std::size_t r = 0; r < g.size() / c; ++r) {
            kernels::axpy(sign, g.data() + r * c, db->data(), c);
          }
        } else {
          kernels::axpy(sign, g.data(), db->data(), g.size());
        }
      }
      break;
    }
    case OpKind::Mul: {
      const Tensor& a = val(n.parents[0]);
      const Tensor& b = val(n.parents[1]);
      if (Tensor* da = acc(0)) {
        for (std::size_t j = 0; j < g.size(); ++j) (*da)[j] += g[j] * b[j];
      }
      if (Tensor* db = acc(1)) {
        for (std::size_t j = 0; j < g.size(); ++j) (*db)[j] += g[j] * a[j];
      }
      break;
    }
    case OpKind::Scale:
      if (Tensor* da = acc(0)) kernels::axpy(n.attrs.scalar, g.data(), da->data(), g.size());
      break;
    case OpKind::Sigmoid:
      if (Tensor* da = acc(0)) {
        for (std::size_t j = 0; j < g.size(); ++j) (*da)[j] += g[j] * y[j] * (1.0 - y[j]);
      }
      break;
    case OpKind::Tanh:
      if (Tensor* da = acc(0)) {
        for (std::size_t j = 0; j < g.size(); ++j) (*da)[j] += g[j] * (1.0 - y[j] * y[j]);
      }
      break;
    case OpKind::Relu:
      if (Tensor* da = acc(0)) {
        const Tensor& a = val(n.parents[0]);
        for (std::size_t j = 0; j < g.size(); ++j) (*da)[j] += a[j] > 0 ? g[j] : 0.0;
      }
      break;
    case OpKind::Log:
      if (Tensor* da = acc(0)) {
        const Tensor& a = val(n.parents[0]);
        for (std::size_t j = 0; j < g.size(); ++j) (*da)[j] += g[j] / a[j];
      }
      break;
    case OpKind::LogSigmoid:
      if (Tensor* da = acc(0)) {
        const Tensor& a = val(n.parents[0]);
        for (std::size_t j = 0; j < g.size(); ++j) (*da)[j] += g[j] * sigmoid_of(-a[j]);
      }
      break;
    case OpKind::Neg:
      if (Tensor* da = acc(0)) kernels::axpy(-1.0, g.data(), da->data(), g.size());
      break;
    case OpKind::Clamp:
      if (Tensor* da = acc(0)) {
        const Tensor& a = val(n.parents[0]);
        for (std::size_t j = 0; j < g.size(); ++j) {
          if (a[j] >= n.attrs.lo && a[j] <= n.attrs.hi) (*da)[j] += g[j];
        }
      }
      break;
    case OpKind::SoftmaxLast:
      if (Tensor* da = acc(0)) {
        const std::size_t c = y.cols();
        for (std::size_t r = 0; r < y.rows(); ++r) {
          const double* yr = y.data() + r * c;
          const double* gr = g.data() + r * c;
          const double s = kernels::dot(yr, gr, c);
          double* dr = da->data() + r * c;
          for (std::size_t j = 0; j < c; ++j) dr[j] += yr[j] * (gr[j] - s);
        }
      }
      break;
    case OpKind::Gather:
      if (Tensor* da = acc(0)) {
        const std::size_t d = da->cols();
        for (std::size_t r = 0; r < n.attrs.indices.size(); ++r) {
          kernels::axpy(1.0, g.data() + r * d, da->data() + n.attrs.indices[r] * d, d);
        }
      }
      break;
    case OpKind::Concat:
      if (n.attrs.axis == 0) {
        std::size_t off = 0;
        for (std::size_t p = 0; p < n.parents.size(); ++p) {
          const std::size_t sz = val(n.parents[p]).size();
          if (Tensor* dp = acc(p)) kernels::axpy(1.0, g.data() + off, dp->data(), sz);
          off += sz;
        }
      } else {
        const std::size_t total = y.cols();
        std::size_t off = 0;
        for (std::size_t p = 0; p < n.parents.size(); ++p) {
          const std::size_t c = val(n.parents[p]).cols();
          if (Tensor* dp = acc(p)) {
            for (std::size_t r = 0; r < y.rows(); ++r) {
              kernels::axpy(1.0, g.data() + r * total + off, dp->data() + r * c, c);
            }
          }
          off += c;
        }
      }
      break;
    case OpKind::SliceRows:
      if (Tensor* da = acc(0)) {
        const std::size_t c = da->cols();
        kernels::axpy(1.0, g.data(), da->data() + n.attrs.start * c, n.attrs.count * c);
      }
      break;
    case OpKind::Mean:
    case OpKind::Sum:
      if (Tensor* da = acc(0)) {
        const double s = n.op == OpKind::Mean ? g[0] / static_cast<double>(da->size()) : g[0];
        for (double& v : da->values()) v += s;
      }
      break;
    case OpKind::SumLast:
      if (Tensor* da = acc(0)) {
        const std::size_t c = da->cols();
        for (std::size_t r = 0; r < da->rows(); ++r) {
          for (std::size_t j = 0; j < c; ++j) da->at(r, j) += g[r];
        }
      }
      break;
  }
}

BoundParams::BoundParams(Tape& tape, const ParamSet& params) { bind(tape, params); }

void BoundParams::bind(Tape& tape, const ParamSet& params) {
  for (const auto& [name, t] : params) ids_[name] = tape.param(name, t);
}

NodeId BoundParams::operator[](const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) throw ShapeError("parameter '" + name + "' is not bound");
  return it->second;
}

GradcheckReport gradcheck(const ScalarFn& f, const ParamSet& params, double step) {
  if (!(step > 0)) throw ConfigError("gradcheck step must be positive");
  ParamSet analytic;
  {
    Tape tape;
    const NodeId root = f(tape, params);
    analytic = tape.backward(root);
  }
  auto eval = [&](const ParamSet& p) {
    Tape tape;
    const double v = tape.value(f(tape, p)).item();
    if (!std::isfinite(v)) throw NonFiniteError("gradcheck: function value is not finite");
    return v;
  };

  GradcheckReport report;
  ParamSet probe = params;
  for (const auto& [name, t] : params) {
    const Tensor* ga = analytic.contains(name) ? &analytic.at(name) : nullptr;
    Tensor& pt = probe.at(name);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = pt[i];
      pt[i] = orig + step;
      const double fp = eval(probe);
      pt[i] = orig - step;
      const double fm = eval(probe);
      pt[i] = orig;
      const double numeric = (fp - fm) / (2.0 * step);
      const double a = ga != nullptr ? (*ga)[i] : 0.0;
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      if (report.coordinates++ == 0 || err > report.max_error) {
        report.max_error = err;
        report.worst_param = name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace ltap::ad
