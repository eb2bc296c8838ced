// Copyright 2026 The epdist Authors.
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

// Internal helpers for reading and writing the JSON file formats.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>

#include "epdist/params.hpp"
#include "json.hpp"

namespace epdist::detail {

using nlohmann::json;

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ParseError(path.string() + ":" + std::to_string(line) +
                     ": malformed document: " + e.what());
  }
}

inline void write_json_file(const json& doc,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

// Fetches `obj[key]` as T, reporting `where.key` on absence or type mismatch.
template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(where + "." + key + ": missing field");
  }
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) {
      throw ParseError(where + "." + key + ": expected true or false");
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) {
      throw ParseError(where + "." + key + ": expected integer");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) {
      throw ParseError(where + "." + key + ": expected number");
    }
  }
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

inline const json& array_field(const json& obj, const char* key,
                               const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_array()) {
    throw ParseError(where + "." + key + ": expected array");
  }
  return obj.at(key);
}

}  // namespace epdist::detail
