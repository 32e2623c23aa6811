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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ltap {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major f64 tensor with value semantics.
///
/// Rank 0 and 1 tensors are viewed as a single row when a matrix view is
/// needed: rows() is 1 and cols() is the element count.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({}, {v}); }
  static Tensor filled(Shape shape, double v);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  /// Value of a one-element tensor.
  double item() const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

bool all_finite(std::span<const double> values);

/// Named parameter tensors, ordered lexicographically by name.
class ParamSet {
 public:
  using Map = std::map<std::string, Tensor>;

  void set(const std::string& name, Tensor t) { tensors_[name] = std::move(t); }
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  void erase(const std::string& name) { tensors_.erase(name); }

  std::size_t count() const { return tensors_.size(); }
  std::size_t num_values() const;
  bool empty() const { return tensors_.empty(); }

  Map::iterator begin() { return tensors_.begin(); }
  Map::iterator end() { return tensors_.end(); }
  Map::const_iterator begin() const { return tensors_.begin(); }
  Map::const_iterator end() const { return tensors_.end(); }

  /// Concatenation of all tensors in name order.
  std::vector<double> flatten() const;
  /// Inverse of flatten(); throws ShapeError on a length mismatch.
  void unflatten(std::span<const double> flat);

  /// True when both sets have the same names with the same shapes.
  bool same_layout(const ParamSet& other) const;
  ParamSet zeros_like() const;

  /// Subset whose names start with `prefix`.
  ParamSet with_prefix(const std::string& prefix) const;
  /// Copies every tensor of `other` into this set, replacing same-named ones.
  void merge(const ParamSet& other);

  bool operator==(const ParamSet&) const = default;

 private:
  Map tensors_;
};

/// Throws ShapeError naming the first difference.
void require_same_layout(const ParamSet& a, const ParamSet& b, const char* context);

double l2_norm(const ParamSet& p);

// Checkpoint file: "LTAP", u32 version, u32 tensor count, then per tensor
// u32 name length, UTF-8 name, u32 rank, u64 dims, little-endian f64 values.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path);

/// Sibling path for write-then-rename, unique per process and call so
/// concurrent writers of the same file do not collide.
std::filesystem::path temp_sibling(const std::filesystem::path& path);
ParamSet load_checkpoint(const std::filesystem::path& path);

}  // namespace ltap
