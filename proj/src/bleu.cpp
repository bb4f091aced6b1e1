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
#include <map>
#include <stdexcept>

#include "unmt/eval.hpp"

namespace unmt::eval {

namespace {

using Gram = std::array<int, kMaxOrder>;

std::map<Gram, std::size_t> count_ngrams(std::span<const int> s,
                                         std::size_t n) {
  std::map<Gram, std::size_t> counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    Gram g;
    g.fill(-1);
    std::copy_n(s.begin() + static_cast<std::ptrdiff_t>(i), n, g.begin());
    ++counts[g];
  }
  return counts;
}

void check_lists(std::size_t hyps, std::size_t refs) {
  if (hyps != refs) {
    throw std::invalid_argument("BLEU: " + std::to_string(hyps) +
                                " hypotheses for " + std::to_string(refs) +
                                " references");
  }
  if (hyps == 0) throw std::invalid_argument("BLEU: empty corpus");
}

double brevity_penalty(std::size_t hyp_len, std::size_t ref_len) {
  if (hyp_len >= ref_len) return 1.0;
  if (hyp_len == 0) return 0.0;
  return std::exp(1.0 - static_cast<double>(ref_len) /
                            static_cast<double>(hyp_len));
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  return *this;
}

BleuStats sentence_stats(std::span<const int> hyp, std::span<const int> ref) {
  BleuStats s;
  s.hyp_len = hyp.size();
  s.ref_len = ref.size();
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const auto h = count_ngrams(hyp, n);
    const auto r = count_ngrams(ref, n);
    std::size_t total = 0;
    std::size_t match = 0;
    for (const auto& [g, c] : h) {
      total += c;
      if (auto it = r.find(g); it != r.end()) match += std::min(c, it->second);
    }
    s.totals[n - 1] = total;
    s.matches[n - 1] = match;
  }
  return s;
}

std::vector<BleuStats> sentence_stats(std::span<const Sentence> hyps,
                                      std::span<const Sentence> refs) {
  check_lists(hyps.size(), refs.size());
  std::vector<BleuStats> out;
  out.reserve(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    out.push_back(sentence_stats(hyps[i], refs[i]));
  }
  return out;
}

double bleu_score(const BleuStats& s) {
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    if (s.matches[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.matches[n]) /
                        static_cast<double>(s.totals[n]));
  }
  return 100.0 * brevity_penalty(s.hyp_len, s.ref_len) *
         std::exp(log_sum / static_cast<double>(kMaxOrder));
}

BleuReport bleu_from_stats(const BleuStats& s) {
  BleuReport r;
  r.hyp_len = s.hyp_len;
  r.ref_len = s.ref_len;
  r.brevity_penalty = brevity_penalty(s.hyp_len, s.ref_len);
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    r.degenerate[n] = s.totals[n] == 0;
    r.precision[n] = r.degenerate[n] ? 0.0
                                     : static_cast<double>(s.matches[n]) /
                                           static_cast<double>(s.totals[n]);
    r.individual[n] = 100.0 * r.brevity_penalty * r.precision[n];
  }
  r.bleu = bleu_score(s);
  return r;
}

BleuReport corpus_bleu(std::span<const Sentence> hyps,
                       std::span<const Sentence> refs) {
  BleuStats total;
  for (const auto& s : sentence_stats(hyps, refs)) total += s;
  return bleu_from_stats(total);
}

double individual_ngram_bleu(std::span<const Sentence> hyps,
                             std::span<const Sentence> refs, std::size_t n) {
  if (n < 1 || n > kMaxOrder) {
    throw std::invalid_argument("individual_ngram_bleu: order " +
                                std::to_string(n) + " outside 1..4");
  }
  return corpus_bleu(hyps, refs).individual[n - 1];
}

std::array<std::optional<double>, kMaxOrder> delta_table(
    const std::array<double, kMaxOrder>& baseline,
    const std::array<double, kMaxOrder>& retrained) {
  std::array<std::optional<double>, kMaxOrder> out;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    if (baseline[n] != 0.0) {
      out[n] = 100.0 * (retrained[n] - baseline[n]) / baseline[n];
    }
  }
  return out;
}

Sentence TokenInterner::intern(std::span<const std::string> words) {
  Sentence s;
  s.reserve(words.size());
  for (const auto& w : words) {
    auto [it, inserted] = ids_.try_emplace(w, static_cast<int>(ids_.size()));
    s.push_back(it->second);
  }
  return s;
}

std::vector<Sentence> TokenInterner::intern_lines(
    std::span<const std::string> lines) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(intern(tokenize(l)));
  return out;
}

}  // namespace unmt::eval
