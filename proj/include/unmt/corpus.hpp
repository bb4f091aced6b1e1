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

// Synthetic cipher language pairs. A source sentence is drawn from a small
// template grammar; its target is the word-for-word cipher image, optionally
// permuted by a per-template reordering rule.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "unmt/tensor.hpp"
#include "unmt/vocab.hpp"

namespace unmt::corpus {

struct Template {
  /// Literal words and "{CATEGORY}" slots.
  std::vector<std::string> tokens;
  /// Target position k takes the cipher of source position reorder[k].
  /// Empty means identity.
  std::vector<std::size_t> reorder;
};

struct LanguagePairSpec {
  std::string src_lang = "src";
  std::string trg_lang = "trg";
  std::vector<Template> templates;
  std::map<std::string, std::vector<std::string>> categories;
  /// Source word -> target word, bijective over every source word.
  std::map<std::string, std::string> cipher;
  std::uint64_t seed = 1;
  std::size_t sentences = 1000;
  std::array<double, 4> fractions{0.4, 0.4, 0.1, 0.1};
  std::size_t embedding_dim = 32;
  double embedding_noise = 0.0;

  /// Every distinct source word (literals and category members), sorted.
  std::vector<std::string> source_words() const;
  /// Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

/// Parses the JSON spec format (keys: languages, templates, categories,
/// cipher, reorder, seed, sentences, splits, embedding_dim, embedding_noise).
/// A cipher of {"mode": "generated"} is expanded into an explicit map.
LanguagePairSpec parse_spec(const std::string& json_text);
LanguagePairSpec load_spec(const std::string& path);

/// Deterministic pseudo-words, one per source word, all distinct.
std::map<std::string, std::string> generate_cipher(
    const std::vector<std::string>& source_words, std::uint64_t seed);

struct SentencePair {
  std::vector<std::string> src;
  std::vector<std::string> trg;
};

std::vector<SentencePair> generate_corpus(const LanguagePairSpec& spec,
                                          std::size_t n, std::mt19937_64& rng);

enum class Provenance { kTrainMonoSrc, kTrainMonoTrg, kDev, kTest };

struct SplitIndices {
  std::vector<std::size_t> mono_src;
  std::vector<std::size_t> mono_trg;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};

/// Partitions [0, n) into four disjoint index sets. Sizes are rounded
/// n * fraction for the first three; the test split takes the remainder.
SplitIndices split_indices(std::size_t n, const std::array<double, 4>& fractions,
                           std::mt19937_64& rng);

struct Corpus {
  std::string lang;
  Provenance provenance = Provenance::kTrainMonoSrc;
  std::vector<Sentence> sentences;
  std::vector<std::size_t> origin;  // index into the generated pair list
};

struct ParallelCorpus {
  std::vector<Sentence> src;
  std::vector<Sentence> trg;
};

struct Vocabularies {
  Vocabulary src;
  Vocabulary trg;
};

Vocabularies build_vocabularies(const LanguagePairSpec& spec);

struct SplitCorpora {
  Corpus mono_src;  // source side only
  Corpus mono_trg;  // target side only
  ParallelCorpus dev;
  ParallelCorpus test;
};

/// Materializes the four splits; monolingual splits keep one side each.
SplitCorpora split_corpora(const std::vector<SentencePair>& pairs,
                           const Vocabularies& vocabs,
                           const std::array<double, 4>& fractions,
                           std::mt19937_64& rng);

struct EmbeddingTables {
  Tensor src;
  Tensor trg;
};

/// Random unit vectors for source words; each target word copies its cipher
/// preimage plus N(0, noise^2) per coordinate. Special tokens are shared.
EmbeddingTables oracle_embeddings(const Vocabulary& src, const Vocabulary& trg,
                                  const std::map<std::string, std::string>& cipher,
                                  std::size_t dim, double noise,
                                  std::mt19937_64& rng);

/// word2vec text format: "V d" header, then "token v1 ... vd".
void save_embeddings(const std::string& path, const Vocabulary& vocab,
                     const Tensor& table);
Tensor load_embeddings(const std::string& path, const Vocabulary& vocab);

/// Reads a corpus file and maps words through `vocab` (unknown -> <unk>).
std::vector<Sentence> read_corpus(const std::string& path,
                                  const Vocabulary& vocab);
void write_corpus(const std::string& path,
                  const std::vector<Sentence>& sentences,
                  const Vocabulary& vocab);

}  // namespace unmt::corpus
