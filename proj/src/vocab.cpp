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

#include "unmt/vocab.hpp"

#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace unmt {

Vocabulary::Vocabulary(std::string lang) : lang_(std::move(lang)) {
  for (const char* s : {"<pad>", "<s>", "</s>", "<unk>"}) add(s);
}

int Vocabulary::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  if (token.empty() ||
      token.find_first_of(" \t\r\n") != std::string::npos) {
    throw std::invalid_argument("Vocabulary::add: invalid token '" + token +
                                "'");
  }
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw std::out_of_range("Vocabulary(" + lang_ + "): id " +
                            std::to_string(id) + " outside [0, " +
                            std::to_string(tokens_.size()) + ")");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

Sentence Vocabulary::encode(std::span<const std::string> words) const {
  Sentence ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(find(w).value_or(kUnk));
  return ids;
}

Sentence Vocabulary::encode_strict(std::span<const std::string> words) const {
  Sentence ids;
  ids.reserve(words.size());
  for (const auto& w : words) {
    auto id = find(w);
    if (!id) {
      throw std::invalid_argument("Vocabulary(" + lang_ + "): unknown word '" +
                                  w + "'");
    }
    ids.push_back(*id);
  }
  return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const int> ids) const {
  std::vector<std::string> words;
  words.reserve(ids.size());
  for (int id : ids) words.push_back(token(id));
  return words;
}

void Vocabulary::save(const std::string& path) const {
  write_lines(path, tokens_);
}

Vocabulary Vocabulary::load(const std::string& path, std::string lang) {
  const auto lines = read_lines(path);
  Vocabulary v(std::move(lang));
  if (lines.size() < kNumSpecial) {
    throw std::runtime_error(path + ": vocabulary has fewer than " +
                             std::to_string(kNumSpecial) + " entries");
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i < kNumSpecial) {
      if (lines[i] != v.tokens_[i]) {
        throw std::runtime_error(path + ": line " + std::to_string(i + 1) +
                                 " must be reserved token " + v.tokens_[i]);
      }
      continue;
    }
    if (v.find(lines[i])) {
      throw std::runtime_error(path + ": duplicate token '" + lines[i] + "'");
    }
    v.add(lines[i]);
  }
  return v;
}

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string detokenize(std::span<const std::string> words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open for reading (" +
                             std::strerror(errno) + ")");
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw std::runtime_error(path + ": read error");
  return lines;
}

void write_lines(const std::string& path, std::span<const std::string> lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing (" +
                             std::strerror(errno) + ")");
  }
  for (const auto& l : lines) out << l << '\n';
  out.flush();
  if (!out) throw std::runtime_error(path + ": write error");
}

}  // namespace unmt
