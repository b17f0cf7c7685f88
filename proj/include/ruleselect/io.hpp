// Copyright 2026 The RuleSelect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// JSON Lines reading and writing on top of nlohmann::json.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ruleselect/error.hpp"

namespace ruleselect {

using Json = nlohmann::json;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

// Parses every non-blank line. Parse failures report the 1-based line number.
inline std::vector<Json> parse_jsonl(const std::string& text,
                                     const std::string& source = "<memory>") {
  std::vector<Json> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw ConsistencyError(source + ":" + std::to_string(lineno) +
                             ": invalid JSON: " + e.what());
    }
  }
  return rows;
}

inline std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(read_text_file(path), path.string());
}

inline std::string to_jsonl(const std::vector<Json>& rows) {
  std::string out;
  for (const Json& row : rows) {
    out += row.dump();
    out += '\n';
  }
  return out;
}

inline void write_jsonl(const std::filesystem::path& path,
                        const std::vector<Json>& rows) {
  write_text_file(path, to_jsonl(rows));
}

// Typed field access with a readable error naming the record.
template <typename T>
T require_field(const Json& row, const char* key, const std::string& where) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) {
    throw ConsistencyError(where + ": missing field \"" + key + "\"");
  }
  try {
    return it->get<T>();
  } catch (const Json::exception& e) {
    throw ConsistencyError(where + ": bad field \"" + key + "\": " + e.what());
  }
}

}  // namespace ruleselect
