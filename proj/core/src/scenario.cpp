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

#include "gmusic/scenario.hpp"

#include <fstream>
#include <optional>
#include <sstream>

#include "gmusic/errors.hpp"
#include "json.hpp"

namespace gmusic {

namespace {

using nlohmann::json;

CMatrix read_matrix(const json& j, int rows, int cols) {
  CMatrix m = CMatrix::Zero(rows, cols);
  auto fill = [&](const json& part, bool imag) {
    if (!part.is_array() || static_cast<int>(part.size()) != rows) {
      throw ConfigError("eigenvector matrix must have M rows");
    }
    for (int i = 0; i < rows; ++i) {
      const json& row = part[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<int>(row.size()) != cols) {
        throw ConfigError("eigenvector matrix must have K columns");
      }
      for (int k = 0; k < cols; ++k) {
        const double v = row[static_cast<std::size_t>(k)].get<double>();
        if (imag) m(i, k).imag(v); else m(i, k).real(v);
      }
    }
  };
  if (j.is_array()) {
    fill(j, false);
  } else if (j.is_object() && j.contains("re")) {
    fill(j.at("re"), false);
    if (j.contains("im")) fill(j.at("im"), true);
  } else {
    throw ConfigError("eigenvectors must be \"canonical\" or a matrix");
  }
  return m;
}

CVector read_probe(const json& j, int M, const char* name) {
  if (!j.is_object() || !j.contains("type")) {
    throw ConfigError(std::string(name) + " must be an object with a \"type\" field");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "canonical") {
    const int idx = j.at("index").get<int>();
    if (idx < 1 || idx > M) {
      throw ConfigError(std::string(name) + ".index must lie in [1, M]");
    }
    CVector d = CVector::Zero(M);
    d(idx - 1) = 1.0;
    return d;
  }
  if (type == "explicit") {
    const auto re = j.at("re").get<std::vector<double>>();
    std::vector<double> im(re.size(), 0.0);
    if (j.contains("im")) im = j.at("im").get<std::vector<double>>();
    if (static_cast<int>(re.size()) != M || im.size() != re.size()) {
      throw ConfigError(std::string(name) + " must have M entries");
    }
    CVector d(M);
    for (int i = 0; i < M; ++i) d(i) = Complex(re[static_cast<std::size_t>(i)], im[static_cast<std::size_t>(i)]);
    return d;
  }
  throw ConfigError(std::string(name) + ".type must be \"canonical\" or \"explicit\"");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    const int M = j.at("M").get<int>();
    const int N = j.at("N").get<int>();
    const double sigma2 = j.value("sigma2", 1.0);
    std::vector<double> lambdas;
    if (j.contains("signal_eigenvalues")) lambdas = j.at("signal_eigenvalues").get<std::vector<double>>();
    const int K = static_cast<int>(lambdas.size());

    const json ev = j.value("eigenvectors", json("canonical"));
    std::optional<SignalModel> model;
    if (ev.is_string()) {
      if (ev.get<std::string>() != "canonical") throw ConfigError("unknown eigenvectors keyword");
      model = SignalModel::build_canonical(M, N, sigma2, lambdas);
    } else {
      if (M <= 0 || K < 0) throw ConfigError("M must be positive");
      model = SignalModel::build(M, N, sigma2, lambdas, read_matrix(ev, M, K));
    }

    if (!j.contains("d1")) throw ConfigError("scenario needs a d1 probe vector");
    CVector d1 = read_probe(j.at("d1"), M, "d1");
    CVector d2 = j.contains("d2") ? read_probe(j.at("d2"), M, "d2") : d1;

    Complex xi = 1.0;
    if (j.contains("xi")) {
      const json& x = j.at("xi");
      xi = x.is_number() ? Complex(x.get<double>(), 0.0)
                         : Complex(x.value("re", 0.0), x.value("im", 0.0));
    }
    const std::uint64_t seed = j.value("seed", std::uint64_t{1});
    return Scenario{std::move(*model), SubspaceQuery(std::move(d1), std::move(d2), xi), seed};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid scenario field: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str());
}

}  // namespace gmusic
