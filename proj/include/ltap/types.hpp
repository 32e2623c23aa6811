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
#include <vector>

namespace ltap {

/// Dense item index. 0 is the padding item; real items are 1..num_items.
using ItemId = std::uint32_t;
inline constexpr ItemId kPadding = 0;

using UserIndex = std::uint32_t;

/// An L-item prefix (left-padded with kPadding) and the item that follows it.
struct TaskWindow {
  std::vector<ItemId> input;
  ItemId target = kPadding;
  UserIndex user = 0;
};

/// K windows drawn from a single user's task, flattened for the encoders.
struct MiniBatch {
  std::size_t window_len = 0;
  std::vector<ItemId> inputs;   // K * window_len, row-major
  std::vector<ItemId> targets;  // K
  int label = 0;                // 1 = head user, 0 = tail user
  UserIndex user = 0;

  std::size_t size() const { return targets.size(); }
};

}  // namespace ltap
