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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "unmt/corpus.hpp"

using namespace unmt;
using namespace unmt::corpus;

namespace {

const char* kSmallSpec = R"({
  "seed": 3,
  "sentences": 100,
  "splits": [0.4, 0.4, 0.1, 0.1],
  "embedding_dim": 8,
  "cipher": {"mode": "generated", "seed": 5},
  "categories": {"N": ["dog", "cat", "fox"], "V": ["sees", "bites"]},
  "templates": ["the {N} {V} the {N}", "a {N} {V}"],
  "reorder": {"1": [2, 0, 1]}
})";

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("unmt_corpus_" + name);
}

}  // namespace

TEST_CASE("spec parsing") {
  const auto spec = parse_spec(kSmallSpec);
  CHECK(spec.templates.size() == 2);
  CHECK(spec.templates[1].reorder == std::vector<std::size_t>{2, 0, 1});
  CHECK(spec.source_words() ==
        std::vector<std::string>{"a", "bites", "cat", "dog", "fox", "sees", "the"});
  CHECK(spec.cipher.size() == 7);
  CHECK_THROWS_AS(parse_spec(R"({"templates": [], "categories": {}, "bogus": 1})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_spec(R"({"templates": ["{X} y"], "categories": {}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_spec(R"({"templates": ["a b"], "categories": {},
                                  "cipher": {"mode": "map", "map": {"a": "z", "b": "z"}}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_spec("{not json"), std::invalid_argument);
}

TEST_CASE("identity cipher copies sentences") {
  const auto spec = parse_spec(R"({"templates": ["x {A} y"],
                                   "categories": {"A": ["p", "q"]},
                                   "cipher": {"mode": "identity"}})");
  std::mt19937_64 rng(1);
  for (const auto& p : generate_corpus(spec, 20, rng)) CHECK(p.src == p.trg);
}

TEST_CASE("target follows the cipher and the reorder") {
  const auto spec = parse_spec(kSmallSpec);
  std::mt19937_64 rng(2);
  for (const auto& p : generate_corpus(spec, 200, rng)) {
    REQUIRE(p.src.size() == p.trg.size());
    if (p.src.size() == 3) {
      CHECK(p.trg[0] == spec.cipher.at(p.src[2]));
      CHECK(p.trg[1] == spec.cipher.at(p.src[0]));
      CHECK(p.trg[2] == spec.cipher.at(p.src[1]));
    } else {
      for (std::size_t k = 0; k < p.src.size(); ++k) {
        CHECK(p.trg[k] == spec.cipher.at(p.src[k]));
      }
    }
  }
}

TEST_CASE("generation is seeded") {
  const auto spec = parse_spec(kSmallSpec);
  std::mt19937_64 a(9), b(9);
  const auto x = generate_corpus(spec, 50, a);
  const auto y = generate_corpus(spec, 50, b);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].src == y[i].src);
}

TEST_CASE("split sizes and disjointness") {
  std::mt19937_64 rng(4);
  const auto s = split_indices(100, {0.4, 0.4, 0.1, 0.1}, rng);
  CHECK(s.mono_src.size() == 40);
  CHECK(s.mono_trg.size() == 40);
  CHECK(s.dev.size() == 10);
  CHECK(s.test.size() == 10);
  std::set<std::size_t> all;
  for (const auto* part : {&s.mono_src, &s.mono_trg, &s.dev, &s.test}) {
    all.insert(part->begin(), part->end());
  }
  CHECK(all.size() == 100);
  CHECK_THROWS_AS(split_indices(3, {0.4, 0.4, 0.1, 0.1}, rng), std::invalid_argument);
}

TEST_CASE("vocabularies cover every generated word") {
  const auto spec = parse_spec(kSmallSpec);
  const auto v = build_vocabularies(spec);
  CHECK(v.src.size() == 7 + kNumSpecial);
  CHECK(v.trg.size() == 7 + kNumSpecial);
  std::mt19937_64 rng(6);
  const auto pairs = generate_corpus(spec, 100, rng);
  const auto split = split_corpora(pairs, v, spec.fractions, rng);
  CHECK(split.mono_src.sentences.size() == 40);
  CHECK(split.dev.src.size() == 10);
  for (const auto& s : split.mono_src.sentences) {
    for (int id : s) CHECK(id >= kNumSpecial);
  }
  for (std::size_t i = 0; i < split.test.src.size(); ++i) {
    CHECK(split.test.src[i].size() == split.test.trg[i].size());
  }
}

TEST_CASE("oracle embeddings align the cipher") {
  const auto spec = parse_spec(kSmallSpec);
  const auto v = build_vocabularies(spec);
  std::mt19937_64 rng(7);
  const auto exact = oracle_embeddings(v.src, v.trg, spec.cipher, 16, 0.0, rng);
  const auto noisy = oracle_embeddings(v.src, v.trg, spec.cipher, 16, 0.1, rng);
  double mean_cos = 0;
  for (const auto& [s, t] : spec.cipher) {
    const auto i = static_cast<std::size_t>(*v.src.find(s));
    const auto j = static_cast<std::size_t>(*v.trg.find(t));
    CHECK(std::ranges::equal(exact.src.row(i), exact.trg.row(j)));
    mean_cos += cosine(noisy.src.row(i), noisy.trg.row(j));
  }
  mean_cos /= static_cast<double>(spec.cipher.size());
  CHECK(mean_cos > 0.9);
  CHECK(std::ranges::equal(noisy.src.row(kPad), noisy.trg.row(kPad)));
  double norm = 0;
  for (double x : exact.src.row(kNumSpecial)) norm += x * x;
  CHECK(norm == doctest::Approx(1.0));
}

TEST_CASE("embedding and corpus files round-trip") {
  const auto spec = parse_spec(kSmallSpec);
  const auto v = build_vocabularies(spec);
  std::mt19937_64 rng(8);
  const auto e = oracle_embeddings(v.src, v.trg, spec.cipher, 8, 0.1, rng);
  const auto path = temp_file("emb.txt");
  save_embeddings(path.string(), v.src, e.src);
  CHECK(load_embeddings(path.string(), v.src) == e.src);

  const auto pairs = generate_corpus(spec, 30, rng);
  std::vector<Sentence> sents;
  for (const auto& p : pairs) sents.push_back(v.trg.encode_strict(p.trg));
  const auto cpath = temp_file("corpus.txt");
  write_corpus(cpath.string(), sents, v.trg);
  CHECK(read_corpus(cpath.string(), v.trg) == sents);

  const auto vpath = temp_file("vocab.txt");
  v.trg.save(vpath.string());
  CHECK(Vocabulary::load(vpath.string(), "trg") == v.trg);
  for (const auto& p : {path, cpath, vpath}) std::filesystem::remove(p);
}

TEST_CASE("tokenize and encode") {
  CHECK(tokenize("  a\tb  c \n") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("").empty());
  Vocabulary v("x");
  CHECK(v.size() == kNumSpecial);
  CHECK(v.add("hi") == kNumSpecial);
  CHECK(v.add("hi") == kNumSpecial);
  const std::vector<std::string> w{"hi", "nope"};
  CHECK(v.encode(w) == Sentence{kNumSpecial, kUnk});
  CHECK_THROWS_AS(v.encode_strict(w), std::invalid_argument);
  CHECK_THROWS_AS(v.token(99), std::out_of_range);
}
