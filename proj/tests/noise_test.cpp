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
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "unmt/noise.hpp"

using namespace unmt;

TEST_CASE("explicit swap plans") {
  const std::vector<int> w{10, 11, 12, 13};
  CHECK(noise::shuffle(w, {0}) == std::vector<int>{11, 10, 12, 13});
  CHECK(noise::shuffle(w, {0, 2}) == std::vector<int>{11, 10, 13, 12});
  CHECK(noise::shuffle(w, {0, 0}) == w);
  CHECK(noise::shuffle(w, {0, 1}) == std::vector<int>{11, 12, 10, 13});
  CHECK_THROWS_AS(noise::shuffle(w, {3}), std::out_of_range);
}

TEST_CASE("plan sizes follow floor(l/2)") {
  std::mt19937_64 rng(1);
  for (std::size_t len = 0; len < 12; ++len) {
    const auto plan = noise::make_swap_plan(len, rng);
    CHECK(plan.size() == len / 2);
    for (std::size_t i : plan) CHECK(i + 1 < len);
  }
}

TEST_CASE("short sentences pass through") {
  std::mt19937_64 rng(2);
  CHECK(noise::corrupt(std::vector<int>{}, rng).empty());
  CHECK(noise::corrupt(std::vector<int>{7}, rng) == std::vector<int>{7});
}

TEST_CASE("randomized shuffles preserve the multiset and length") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len_d(0, 15);
  std::uniform_int_distribution<int> tok_d(4, 9);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<int> w(static_cast<std::size_t>(len_d(rng)));
    for (int& t : w) t = tok_d(rng);
    auto out = noise::corrupt(w, rng);
    REQUIRE(out.size() == w.size());
    std::sort(out.begin(), out.end());
    std::sort(w.begin(), w.end());
    REQUIRE(out == w);
  }
}

TEST_CASE("two distinct words are always swapped") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    CHECK(noise::corrupt(std::vector<int>{5, 6}, rng) ==
          std::vector<int>{6, 5});
  }
}

TEST_CASE("swap positions are uniform") {
  // Pearson chi-squared over the l-1 admissible positions.
  std::mt19937_64 rng(5);
  const std::size_t len = 9;
  std::vector<double> counts(len - 1, 0.0);
  const int draws = 20000;
  for (int i = 0; i < draws / static_cast<int>(len / 2); ++i) {
    for (std::size_t k : noise::make_swap_plan(len, rng)) counts[k] += 1.0;
  }
  double total = 0.0;
  for (double c : counts) total += c;
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  // p > 0.01 <=> stat below the 0.99 quantile.
  CAPTURE(stat);
  CHECK(stat < oracle::chi2_quantile_99(counts.size() - 1));
}

TEST_CASE("the invocation counter counts plans") {
  std::mt19937_64 rng(6);
  const auto before = noise::invocation_count();
  noise::corrupt(std::vector<int>{1, 2, 3}, rng);
  noise::make_swap_plan(4, rng);
  CHECK(noise::invocation_count() - before == 2);
}
