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

// Binary checkpoint container, little-endian:
//
//   "UNMTCKPT"  u32 version
//   u64 n, n bytes   header JSON (model config, iteration, vocabularies,
//                    caller-supplied config echo)
//   u64 count        then per tensor:
//                      u32 n, n bytes name; u8 trainable; u64 rows; u64 cols;
//                      rows*cols IEEE-754 doubles, row-major
//   u64 n, n bytes   RNG state (std::mt19937_64 text form)

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "unmt/model.hpp"
#include "unmt/params.hpp"
#include "unmt/vocab.hpp"

namespace unmt {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  model::ModelConfig config;
  std::size_t iteration = 0;
  std::vector<std::string> src_vocab;
  std::vector<std::string> trg_vocab;
  std::string config_echo;  // JSON text, stored verbatim
  ParameterSet params;
  std::string rng_state;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
/// Throws std::runtime_error on truncated or malformed input.
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Rebuilds vocabularies stored in a checkpoint.
Vocabulary checkpoint_vocab(const Checkpoint& ckpt, model::Lang lang);

}  // namespace unmt
