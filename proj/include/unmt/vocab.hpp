// Copyright 2026 The unmt-lab Authors
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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace unmt {

inline constexpr int kPad = 0;
inline constexpr int kSos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kNumSpecial = 4;

/// Token-id sequence without the end marker.
using Sentence = std::vector<int>;

/// Bijection between token strings and dense ids. Ids 0-3 are reserved for
/// <pad>, <s>, </s> and <unk> in every vocabulary.
class Vocabulary {
 public:
  explicit Vocabulary(std::string lang = "");

  /// Returns the existing id when the token is already present.
  int add(const std::string& token);
  std::optional<int> find(std::string_view token) const;
  /// Throws std::out_of_range for an id outside [0, size()).
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::string& lang() const { return lang_; }
  std::span<const std::string> tokens() const { return tokens_; }

  /// Unknown words map to <unk>.
  Sentence encode(std::span<const std::string> words) const;
  /// Throws std::invalid_argument on unknown words.
  Sentence encode_strict(std::span<const std::string> words) const;
  std::vector<std::string> decode(std::span<const int> ids) const;

  /// One token per line, line index = id, specials first.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path, std::string lang);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.lang_ == b.lang_ && a.tokens_ == b.tokens_;
  }

 private:
  std::string lang_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Splits on runs of whitespace.
std::vector<std::string> tokenize(std::string_view line);
/// Joins with single spaces.
std::string detokenize(std::span<const std::string> words);

/// Reads a UTF-8 text file, one entry per line. Throws std::runtime_error
/// naming the path on failure.
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, std::span<const std::string> lines);

}  // namespace unmt
