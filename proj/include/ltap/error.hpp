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

#include <stdexcept>
#include <string>

namespace ltap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input shapes do not conform to an operation's rule.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity appeared where only finite values are allowed.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unusable input data (files, vocabularies, checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or command-line usage; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ltap
