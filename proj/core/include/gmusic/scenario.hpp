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

#include <cstdint>
#include <string>

#include "gmusic/model.hpp"

namespace gmusic {

struct Scenario {
  SignalModel model;
  SubspaceQuery query;
  std::uint64_t seed = 1;
};

// Scenario JSON:
//   {"M": 20, "N": 40, "sigma2": 1.0, "signal_eigenvalues": [6, 5],
//    "eigenvectors": "canonical" | {"re": [[...], ...], "im": [[...], ...]},
//    "d1": {"type": "canonical", "index": 20},
//    "d2": {"type": "explicit", "re": [...], "im": [...]},
//    "xi": 1.0 | {"re": 0.0, "im": 1.0},
//    "seed": 1}
// Canonical probe indices are 1-based. Eigenvector matrices are given row by
// row (M rows, K columns); "im" may be omitted. Errors raise ConfigError.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

}  // namespace gmusic
