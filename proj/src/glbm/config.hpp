/*
 * Copyright 2026 The glbm authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace glbm {

enum class KeyKind { integer, real, boolean, choice, text, int_list };

struct KeyInfo {
  std::string key;
  KeyKind kind;
  std::string default_value;
  std::string description;
  std::vector<std::string> choices;  // only for KeyKind::choice
};

// Flat dotted-key configuration covering every module. Values are kept as
// validated strings so that parse -> serialize -> parse is the identity.
//
// Text format: one `dotted.key = value` per line, `#` starts a comment.
class RunConfig {
 public:
  RunConfig();

  static const std::vector<KeyInfo>& keys();
  static const KeyInfo* find_key(std::string_view key);

  void set(std::string_view key, std::string_view value);
  const std::string& get(std::string_view key) const;

  int get_int(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<int> get_int_list(std::string_view key) const;

  // Applies every assignment in `text` on top of the current values.
  void merge_text(std::string_view text, std::string_view source = "<text>");
  void load_file(const std::filesystem::path& path);

  static RunConfig parse(std::string_view text);
  std::string serialize() const;

  bool operator==(const RunConfig& other) const { return values_ == other.values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

// Human-readable table of every key with its default, used by `--help`.
std::string describe_keys();

}  // namespace glbm
