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

#include "unmt/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace unmt::corpus {

using nlohmann::json;

namespace {

bool is_slot(const std::string& tok) {
  return tok.size() > 2 && tok.front() == '{' && tok.back() == '}';
}

std::string slot_name(const std::string& tok) {
  return tok.substr(1, tok.size() - 2);
}

}  // namespace

std::vector<std::string> LanguagePairSpec::source_words() const {
  std::set<std::string> words;
  for (const auto& t : templates)
    for (const auto& tok : t.tokens)
      if (!is_slot(tok)) words.insert(tok);
  for (const auto& [name, list] : categories)
    words.insert(list.begin(), list.end());
  return {words.begin(), words.end()};
}

void LanguagePairSpec::validate() const {
  if (templates.empty()) {
    throw std::invalid_argument("spec: template set is empty");
  }
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const auto& t = templates[i];
    if (t.tokens.empty()) {
      throw std::invalid_argument("spec: template " + std::to_string(i) +
                                  " is empty");
    }
    for (const auto& tok : t.tokens) {
      if (is_slot(tok)) {
        auto it = categories.find(slot_name(tok));
        if (it == categories.end() || it->second.empty()) {
          throw std::invalid_argument("spec: template " + std::to_string(i) +
                                      " uses unresolvable slot " + tok);
        }
      }
    }
    if (!t.reorder.empty()) {
      std::vector<std::size_t> sorted = t.reorder;
      std::sort(sorted.begin(), sorted.end());
      std::vector<std::size_t> iota(t.tokens.size());
      std::iota(iota.begin(), iota.end(), 0);
      if (sorted != iota) {
        throw std::invalid_argument("spec: reorder of template " +
                                    std::to_string(i) +
                                    " is not a permutation of its positions");
      }
    }
  }
  std::set<std::string> images;
  for (const auto& w : source_words()) {
    auto it = cipher.find(w);
    if (it == cipher.end()) {
      throw std::invalid_argument("spec: cipher has no image for '" + w + "'");
    }
    if (!images.insert(it->second).second) {
      throw std::invalid_argument("spec: cipher is not injective at '" +
                                  it->second + "'");
    }
  }
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw std::invalid_argument("spec: split fraction <= 0");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("spec: split fractions sum to " +
                                std::to_string(total));
  }
  if (embedding_dim < 2) throw std::invalid_argument("spec: embedding_dim < 2");
  if (embedding_noise < 0.0) {
    throw std::invalid_argument("spec: embedding_noise < 0");
  }
}

std::map<std::string, std::string> generate_cipher(
    const std::vector<std::string>& source_words, std::uint64_t seed) {
  static constexpr std::string_view kOnsets = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> onset(0, kOnsets.size() - 1);
  std::uniform_int_distribution<std::size_t> vowel(0, kVowels.size() - 1);
  std::uniform_int_distribution<int> syllables(2, 3);
  std::map<std::string, std::string> out;
  std::set<std::string> used;
  for (const auto& w : source_words) {
    std::string candidate;
    do {
      candidate.clear();
      const int n = syllables(rng);
      for (int s = 0; s < n; ++s) {
        candidate.push_back(kOnsets[onset(rng)]);
        candidate.push_back(kVowels[vowel(rng)]);
      }
    } while (used.contains(candidate));
    used.insert(candidate);
    out.emplace(w, candidate);
  }
  return out;
}

LanguagePairSpec parse_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("spec: ") + e.what());
  }
  static const std::set<std::string> kKeys = {
      "languages", "templates", "categories", "cipher", "reorder",
      "seed", "sentences", "splits", "embedding_dim", "embedding_noise"};
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.contains(k)) {
      throw std::invalid_argument("spec: unknown key '" + k + "'");
    }
  }
  LanguagePairSpec spec;
  try {
    if (j.contains("languages")) {
      const auto langs = j.at("languages").get<std::vector<std::string>>();
      if (langs.size() != 2) {
        throw std::invalid_argument("spec: 'languages' needs two entries");
      }
      spec.src_lang = langs[0];
      spec.trg_lang = langs[1];
    }
    for (const auto& t : j.at("templates")) {
      spec.templates.push_back(Template{tokenize(t.get<std::string>()), {}});
    }
    for (const auto& [name, words] : j.at("categories").items()) {
      spec.categories[name] = words.get<std::vector<std::string>>();
    }
    if (j.contains("reorder")) {
      for (const auto& [idx, perm] : j.at("reorder").items()) {
        const std::size_t i = std::stoul(idx);
        if (i >= spec.templates.size()) {
          throw std::invalid_argument("spec: reorder refers to template " +
                                      idx);
        }
        spec.templates[i].reorder = perm.get<std::vector<std::size_t>>();
      }
    }
    spec.seed = j.value("seed", std::uint64_t{1});
    spec.sentences = j.value("sentences", std::size_t{1000});
    if (j.contains("splits")) {
      const auto f = j.at("splits").get<std::vector<double>>();
      if (f.size() != 4) throw std::invalid_argument("spec: 'splits' needs 4");
      std::copy(f.begin(), f.end(), spec.fractions.begin());
    }
    spec.embedding_dim = j.value("embedding_dim", std::size_t{32});
    spec.embedding_noise = j.value("embedding_noise", 0.0);

    const json cipher = j.value("cipher", json{{"mode", "generated"}});
    const std::string mode = cipher.value("mode", "generated");
    const auto words = spec.source_words();
    if (mode == "identity") {
      for (const auto& w : words) spec.cipher[w] = w;
    } else if (mode == "generated") {
      spec.cipher = generate_cipher(words, cipher.value("seed", spec.seed));
    } else if (mode == "map") {
      spec.cipher =
          cipher.at("map").get<std::map<std::string, std::string>>();
    } else {
      throw std::invalid_argument("spec: unknown cipher mode '" + mode + "'");
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

LanguagePairSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open spec file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_spec(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::vector<SentencePair> generate_corpus(const LanguagePairSpec& spec,
                                          std::size_t n, std::mt19937_64& rng) {
  if (spec.templates.empty()) {
    throw std::invalid_argument("generate_corpus: empty template set");
  }
  if (n == 0) throw std::invalid_argument("generate_corpus: n must be >= 1");
  std::uniform_int_distribution<std::size_t> pick_template(
      0, spec.templates.size() - 1);
  std::vector<SentencePair> pairs;
  pairs.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const Template& t = spec.templates[pick_template(rng)];
    SentencePair p;
    p.src.reserve(t.tokens.size());
    for (const auto& tok : t.tokens) {
      if (is_slot(tok)) {
        const auto& words = spec.categories.at(slot_name(tok));
        std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
        p.src.push_back(words[pick(rng)]);
      } else {
        p.src.push_back(tok);
      }
    }
    p.trg.reserve(p.src.size());
    for (std::size_t k = 0; k < p.src.size(); ++k) {
      const std::size_t from = t.reorder.empty() ? k : t.reorder[k];
      p.trg.push_back(spec.cipher.at(p.src[from]));
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

SplitIndices split_indices(std::size_t n, const std::array<double, 4>& fractions,
                           std::mt19937_64& rng) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("split: negative fraction");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("split: fractions must sum to 1");
  }
  std::array<std::size_t, 4> sizes{};
  std::size_t used = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    sizes[k] = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * fractions[k]));
    used += sizes[k];
  }
  if (used >= n) {
    throw std::invalid_argument("split: " + std::to_string(n) +
                                " pairs are insufficient for four splits");
  }
  sizes[3] = n - used;
  for (std::size_t s : sizes) {
    if (s == 0) {
      throw std::invalid_argument("split: " + std::to_string(n) +
                                  " pairs leave an empty split");
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  SplitIndices out;
  std::array<std::vector<std::size_t>*, 4> dst{&out.mono_src, &out.mono_trg,
                                               &out.dev, &out.test};
  std::size_t at = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    dst[k]->assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                   order.begin() + static_cast<std::ptrdiff_t>(at + sizes[k]));
    at += sizes[k];
  }
  return out;
}

Vocabularies build_vocabularies(const LanguagePairSpec& spec) {
  Vocabularies v{Vocabulary(spec.src_lang), Vocabulary(spec.trg_lang)};
  const auto words = spec.source_words();
  for (const auto& w : words) v.src.add(w);
  std::vector<std::string> images;
  images.reserve(words.size());
  for (const auto& w : words) images.push_back(spec.cipher.at(w));
  std::sort(images.begin(), images.end());
  for (const auto& w : images) v.trg.add(w);
  return v;
}

SplitCorpora split_corpora(const std::vector<SentencePair>& pairs,
                           const Vocabularies& vocabs,
                           const std::array<double, 4>& fractions,
                           std::mt19937_64& rng) {
  const SplitIndices idx = split_indices(pairs.size(), fractions, rng);
  SplitCorpora out;
  out.mono_src.lang = vocabs.src.lang();
  out.mono_src.provenance = Provenance::kTrainMonoSrc;
  for (std::size_t i : idx.mono_src) {
    out.mono_src.sentences.push_back(vocabs.src.encode_strict(pairs[i].src));
    out.mono_src.origin.push_back(i);
  }
  out.mono_trg.lang = vocabs.trg.lang();
  out.mono_trg.provenance = Provenance::kTrainMonoTrg;
  for (std::size_t i : idx.mono_trg) {
    out.mono_trg.sentences.push_back(vocabs.trg.encode_strict(pairs[i].trg));
    out.mono_trg.origin.push_back(i);
  }
  for (std::size_t i : idx.dev) {
    out.dev.src.push_back(vocabs.src.encode_strict(pairs[i].src));
    out.dev.trg.push_back(vocabs.trg.encode_strict(pairs[i].trg));
  }
  for (std::size_t i : idx.test) {
    out.test.src.push_back(vocabs.src.encode_strict(pairs[i].src));
    out.test.trg.push_back(vocabs.trg.encode_strict(pairs[i].trg));
  }
  return out;
}

EmbeddingTables oracle_embeddings(
    const Vocabulary& src, const Vocabulary& trg,
    const std::map<std::string, std::string>& cipher, std::size_t dim,
    double noise, std::mt19937_64& rng) {
  if (dim < 2) throw std::invalid_argument("oracle_embeddings: dim < 2");
  if (noise < 0.0) throw std::invalid_argument("oracle_embeddings: noise < 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  EmbeddingTables t{Tensor(src.size(), dim), Tensor(trg.size(), dim)};
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto row = t.src.row(i);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : row) {
        v = gauss(rng);
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : row) v /= norm;
  }
  std::map<std::string, std::string> inverse;
  for (std::size_t i = kNumSpecial; i < src.size(); ++i) {
    const std::string& w = src.token(static_cast<int>(i));
    auto it = cipher.find(w);
    if (it == cipher.end()) {
      throw std::invalid_argument("oracle_embeddings: '" + w +
                                  "' is outside the cipher map");
    }
    inverse.emplace(it->second, w);
  }
  std::normal_distribution<double> jitter(0.0, noise > 0.0 ? noise : 1.0);
  for (std::size_t i = 0; i < trg.size(); ++i) {
    std::size_t from = i;
    if (i >= kNumSpecial) {
      const std::string& w = trg.token(static_cast<int>(i));
      auto it = inverse.find(w);
      if (it == inverse.end()) {
        throw std::invalid_argument("oracle_embeddings: target word '" + w +
                                    "' has no cipher preimage");
      }
      from = static_cast<std::size_t>(*src.find(it->second));
    }
    auto dst = t.trg.row(i);
    auto s = t.src.row(from);
    std::copy(s.begin(), s.end(), dst.begin());
    if (i >= kNumSpecial && noise > 0.0) {
      for (double& v : dst) v += jitter(rng);
    }
  }
  return t;
}

void save_embeddings(const std::string& path, const Vocabulary& vocab,
                     const Tensor& table) {
  if (table.rows() != vocab.size()) {
    throw std::invalid_argument("save_embeddings: table has " +
                                std::to_string(table.rows()) + " rows for " +
                                std::to_string(vocab.size()) + " words");
  }
  std::vector<std::string> lines;
  lines.push_back(std::to_string(table.rows()) + " " +
                  std::to_string(table.cols()));
  char buf[40];
  for (std::size_t i = 0; i < table.rows(); ++i) {
    std::string line = vocab.token(static_cast<int>(i));
    for (double v : table.row(i)) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      line += buf;
    }
    lines.push_back(std::move(line));
  }
  write_lines(path, lines);
}

Tensor load_embeddings(const std::string& path, const Vocabulary& vocab) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty embedding file");
  const auto header = tokenize(lines[0]);
  if (header.size() != 2) {
    throw std::runtime_error(path + ": header must be '<count> <dim>'");
  }
  const std::size_t count = std::stoul(header[0]);
  const std::size_t dim = std::stoul(header[1]);
  if (count != vocab.size() || lines.size() != count + 1) {
    throw std::runtime_error(path + ": expected " +
                             std::to_string(vocab.size()) + " vectors");
  }
  Tensor table(count, dim);
  for (std::size_t i = 0; i < count; ++i) {
    const auto fields = tokenize(lines[i + 1]);
    if (fields.size() != dim + 1 ||
        fields[0] != vocab.token(static_cast<int>(i))) {
      throw std::runtime_error(path + ": line " + std::to_string(i + 2) +
                               " does not match vocabulary entry '" +
                               vocab.token(static_cast<int>(i)) + "'");
    }
    for (std::size_t k = 0; k < dim; ++k) table(i, k) = std::stod(fields[k + 1]);
  }
  return table;
}

std::vector<Sentence> read_corpus(const std::string& path,
                                  const Vocabulary& vocab) {
  std::vector<Sentence> out;
  for (const auto& line : read_lines(path)) {
    out.push_back(vocab.encode(tokenize(line)));
  }
  return out;
}

void write_corpus(const std::string& path,
                  const std::vector<Sentence>& sentences,
                  const Vocabulary& vocab) {
  std::vector<std::string> lines;
  lines.reserve(sentences.size());
  for (const auto& s : sentences) lines.push_back(detokenize(vocab.decode(s)));
  write_lines(path, lines);
}

}  // namespace unmt::corpus
