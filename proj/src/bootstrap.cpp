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

#include <random>
#include <stdexcept>

#include "unmt/eval.hpp"
#include "unmt/seeds.hpp"

namespace unmt::eval {

namespace {

struct PairedStats {
  std::vector<BleuStats> a;
  std::vector<BleuStats> b;
};

PairedStats paired_stats(std::span<const Sentence> hyps_a,
                         std::span<const Sentence> hyps_b,
                         std::span<const Sentence> refs) {
  if (hyps_a.size() != hyps_b.size()) {
    throw std::invalid_argument("paired_bootstrap: systems have " +
                                std::to_string(hyps_a.size()) + " and " +
                                std::to_string(hyps_b.size()) + " hypotheses");
  }
  return {sentence_stats(hyps_a, refs), sentence_stats(hyps_b, refs)};
}

// True when B beats A on the resample described by `indices`.
bool b_wins(const PairedStats& s, std::span<const std::size_t> indices) {
  BleuStats a;
  BleuStats b;
  for (std::size_t i : indices) {
    a += s.a[i];
    b += s.b[i];
  }
  return bleu_score(b) > bleu_score(a);
}

BootstrapResult finish(const PairedStats& s, std::size_t samples,
                       std::size_t wins, double alpha) {
  BootstrapResult r;
  r.samples = samples;
  r.wins_b = wins;
  r.p_value = static_cast<double>(samples - wins) / static_cast<double>(samples);
  r.alpha = alpha;
  r.significant = r.p_value < alpha;
  BleuStats a;
  BleuStats b;
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    a += s.a[i];
    b += s.b[i];
  }
  r.bleu_a = bleu_score(a);
  r.bleu_b = bleu_score(b);
  return r;
}

}  // namespace

BootstrapResult paired_bootstrap(std::span<const Sentence> hyps_a,
                                 std::span<const Sentence> hyps_b,
                                 std::span<const Sentence> refs,
                                 std::size_t samples, std::uint64_t seed,
                                 double alpha, kernels::Exec exec) {
  if (samples == 0) {
    throw std::invalid_argument("paired_bootstrap: sample count must be >= 1");
  }
  const PairedStats stats = paired_stats(hyps_a, hyps_b, refs);
  const std::size_t n = stats.a.size();
  std::vector<std::uint8_t> outcome(samples, 0);
  kernels::for_each_index(exec, samples, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(seed, k));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = pick(rng);
    outcome[k] = b_wins(stats, idx) ? 1 : 0;
  });
  std::size_t wins = 0;
  for (auto o : outcome) wins += o;
  return finish(stats, samples, wins, alpha);
}

BootstrapResult paired_bootstrap_exhaustive(std::span<const Sentence> hyps_a,
                                            std::span<const Sentence> hyps_b,
                                            std::span<const Sentence> refs,
                                            double alpha) {
  const PairedStats stats = paired_stats(hyps_a, hyps_b, refs);
  const std::size_t n = stats.a.size();
  if (n > 7) {
    throw std::invalid_argument("paired_bootstrap_exhaustive: " +
                                std::to_string(n) + " sentences is too many");
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= n;
  std::vector<std::size_t> idx(n, 0);
  std::size_t wins = 0;
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t code = k;
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = code % n;
      code /= n;
    }
    if (b_wins(stats, idx)) ++wins;
  }
  return finish(stats, total, wins, alpha);
}

}  // namespace unmt::eval
