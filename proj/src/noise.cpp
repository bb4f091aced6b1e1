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

#include "unmt/noise.hpp"

#include <atomic>
#include <stdexcept>
#include <string>
#include <utility>

namespace unmt::noise {

namespace {
std::atomic<std::uint64_t> g_invocations{0};
}  // namespace

std::uint64_t invocation_count() {
  return g_invocations.load(std::memory_order_relaxed);
}

SwapPlan make_swap_plan(std::size_t length, std::mt19937_64& rng) {
  g_invocations.fetch_add(1, std::memory_order_relaxed);
  SwapPlan plan;
  if (length < 2) return plan;
  std::uniform_int_distribution<std::size_t> pick(0, length - 2);
  plan.reserve(length / 2);
  for (std::size_t k = 0; k < length / 2; ++k) plan.push_back(pick(rng));
  return plan;
}

std::vector<int> shuffle(std::span<const int> words, const SwapPlan& plan) {
  std::vector<int> out(words.begin(), words.end());
  for (std::size_t i : plan) {
    if (i + 1 >= out.size()) {
      throw std::out_of_range("shuffle: swap index " + std::to_string(i) +
                              " invalid for length " +
                              std::to_string(out.size()));
    }
    std::swap(out[i], out[i + 1]);
  }
  return out;
}

std::vector<int> corrupt(std::span<const int> words, std::mt19937_64& rng) {
  return shuffle(words, make_swap_plan(words.size(), rng));
}

}  // namespace unmt::noise
