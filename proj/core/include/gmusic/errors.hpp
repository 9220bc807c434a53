// Copyright 2026 The gmusic Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace gmusic {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: dimensions, eigenvalues, scenario files, flags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Evaluation at a pole or on a support edge.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The cluster separation conditions (or the spiked margin) do not hold.
class SeparationError : public Error {
 public:
  using Error::Error;
};

// Root finding, quadrature or a self-check failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmusic
