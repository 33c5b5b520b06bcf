// Copyright 2026 The pilco Authors
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

// JSON helpers shared by the config and serialization code.

#ifndef PILCO_SRC_JSON_UTIL_H_
#define PILCO_SRC_JSON_UTIL_H_

#include <set>
#include <string>

#include "json.hpp"
#include "pilco/linalg.h"

namespace pilco::json_util {

using nlohmann::json;

inline json ToJson(const VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// Array of rows.
inline json ToJson(const MatrixXd& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) a.push_back(ToJson(VectorXd(m.row(r))));
  return a;
}

inline VectorXd VectorFromJson(const json& j) {
  if (!j.is_array()) throw DomainError("expected a JSON array");
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

inline MatrixXd MatrixFromJson(const json& j) {
  if (!j.is_array()) throw DomainError("expected a JSON array of rows");
  if (j.empty()) return MatrixXd();
  const size_t cols = j[0].size();
  MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw DomainError("matrix rows must have equal length");
    for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

// Throws DomainError if `j` has a key outside `allowed`.
inline void RequireKeys(const json& j, const std::string& where,
                        const std::set<std::string>& allowed) {
  if (!j.is_object()) throw DomainError(where + ": expected a JSON object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw DomainError(where + ": unknown key '" + item.key() + "'");
}

// Reads j[key] into *out when present.
template <typename T>
void Get(const json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j[key].get<T>();
}

inline void Get(const json& j, const char* key, VectorXd* out) {
  if (j.contains(key)) *out = VectorFromJson(j[key]);
}

inline void Get(const json& j, const char* key, MatrixXd* out) {
  if (j.contains(key)) *out = MatrixFromJson(j[key]);
}

}  // namespace pilco::json_util

#endif  // PILCO_SRC_JSON_UTIL_H_
