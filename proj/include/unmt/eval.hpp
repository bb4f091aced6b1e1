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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "unmt/kernels.hpp"
#include "unmt/tensor.hpp"
#include "unmt/vocab.hpp"

namespace unmt::eval {

inline constexpr std::size_t kMaxOrder = 4;

/// Sufficient statistics for corpus BLEU; additive over sentences.
struct BleuStats {
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  std::array<std::size_t, kMaxOrder> matches{};  // clipped
  std::array<std::size_t, kMaxOrder> totals{};   // hypothesis n-grams

  BleuStats& operator+=(const BleuStats& o);
  friend bool operator==(const BleuStats&, const BleuStats&) = default;
};

BleuStats sentence_stats(std::span<const int> hyp, std::span<const int> ref);

/// Throws std::invalid_argument when the lists differ in length or are empty.
std::vector<BleuStats> sentence_stats(std::span<const Sentence> hyps,
                                      std::span<const Sentence> refs);

struct BleuReport {
  double bleu = 0.0;  // [0, 100]
  std::array<double, kMaxOrder> precision{};
  double brevity_penalty = 1.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  std::array<double, kMaxOrder> individual{};  // BLEU-n, [0, 100]
  std::array<bool, kMaxOrder> degenerate{};    // no hypothesis n-grams
};

/// multi-bleu conventions: clipped counts summed over the corpus, geometric
/// mean of p1..p4, BP = min(1, exp(1 - r/h)), zero if any pn is zero.
BleuReport bleu_from_stats(const BleuStats& s);
/// Corpus BLEU only; the hot path of the bootstrap.
double bleu_score(const BleuStats& s);

BleuReport corpus_bleu(std::span<const Sentence> hyps,
                       std::span<const Sentence> refs);

/// BP * pn scaled to [0, 100]; n in 1..4.
double individual_ngram_bleu(std::span<const Sentence> hyps,
                             std::span<const Sentence> refs, std::size_t n);

/// Percentage change per order; nullopt where the baseline score is zero.
std::array<std::optional<double>, kMaxOrder> delta_table(
    const std::array<double, kMaxOrder>& baseline,
    const std::array<double, kMaxOrder>& retrained);

struct BootstrapResult {
  std::size_t samples = 0;
  std::size_t wins_b = 0;  // resamples with BLEU_B > BLEU_A
  double p_value = 1.0;    // share of resamples with BLEU_B <= BLEU_A
  double alpha = 0.05;
  bool significant = false;
  double bleu_a = 0.0;  // full test set
  double bleu_b = 0.0;
};

/// Paired bootstrap test of "B is better than A". Resample k draws its
/// indices from a generator seeded by derive_seed(seed, k), so the result is
/// independent of how resamples are scheduled over threads.
BootstrapResult paired_bootstrap(std::span<const Sentence> hyps_a,
                                 std::span<const Sentence> hyps_b,
                                 std::span<const Sentence> refs,
                                 std::size_t samples, std::uint64_t seed,
                                 double alpha = 0.05,
                                 kernels::Exec exec = kernels::Exec::Serial);

/// Same test over every ordered index tuple (n^n resamples). Only for tiny
/// corpora; throws std::invalid_argument when n > 7.
BootstrapResult paired_bootstrap_exhaustive(std::span<const Sentence> hyps_a,
                                            std::span<const Sentence> hyps_b,
                                            std::span<const Sentence> refs,
                                            double alpha = 0.05);

struct ScrambleResult {
  bool flagged = false;
  double p1 = 0.0;  // add-one smoothed
  double p2 = 0.0;
  bool degenerate = false;  // empty hypothesis
};

/// Flags high unigram / low bigram overlap: p1 >= tau1 and p2 <= tau2.
ScrambleResult scramble_diagnose(std::span<const int> hyp,
                                 std::span<const int> ref, double tau1 = 0.6,
                                 double tau2 = 0.3);

struct ScrambleSummary {
  std::vector<ScrambleResult> sentences;
  double flagged_fraction = 0.0;
};

ScrambleSummary scramble_corpus(std::span<const Sentence> hyps,
                                std::span<const Sentence> refs,
                                double tau1 = 0.6, double tau2 = 0.3);

/// Shannon entropy in nats; 0 log 0 = 0.
double row_entropy(std::span<const double> row);
double mean_row_entropy(const Tensor& attention);
/// Mean over every row of every matrix.
double pooled_row_entropy(std::span<const Tensor> attentions);

/// First row: empty corner then source tokens; then one row per target
/// token with weights printed to 6 decimals.
std::string heatmap_csv(const Tensor& attention,
                        std::span<const std::string> src_tokens,
                        std::span<const std::string> tgt_tokens);

struct Heatmap {
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;
  Tensor weights;
};
Heatmap parse_heatmap_csv(const std::string& text);

/// Writes the CSV and returns the mean row entropy.
double export_heatmap(const Tensor& attention,
                      std::span<const std::string> src_tokens,
                      std::span<const std::string> tgt_tokens,
                      const std::string& path);

/// Maps arbitrary token strings to ids for scoring plain-text files.
class TokenInterner {
 public:
  Sentence intern(std::span<const std::string> words);
  std::vector<Sentence> intern_lines(std::span<const std::string> lines);

 private:
  std::unordered_map<std::string, int> ids_;
};

}  // namespace unmt::eval
