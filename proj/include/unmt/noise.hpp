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
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace unmt::noise {

/// Adjacent-swap positions; entry i swaps tokens i and i+1.
using SwapPlan = std::vector<std::size_t>;

/// floor(l/2) positions drawn uniformly, independently and with replacement
/// from [0, l-2]. Empty for l < 2.
SwapPlan make_swap_plan(std::size_t length, std::mt19937_64& rng);

/// Applies the swaps in order. Throws std::out_of_range when a position does
/// not leave room for its right neighbour.
std::vector<int> shuffle(std::span<const int> words, const SwapPlan& plan);

/// make_swap_plan + shuffle. `words` must not contain the end marker.
std::vector<int> corrupt(std::span<const int> words, std::mt19937_64& rng);

/// Process-wide count of make_swap_plan calls, for call accounting in tests.
std::uint64_t invocation_count();

}  // namespace unmt::noise
