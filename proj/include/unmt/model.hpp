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

// Shared-encoder translation model: one bidirectional GRU encoder used for
// both languages and one attentional GRU decoder per language.
//
// Encoder: embeddings (frozen by default) -> forward and backward GRU with
// `hidden` units each; the state matrix is S x 2*hidden.
// Decoder step t (state width D = 2*hidden):
//   alpha_t = softmax(v^T tanh(H U_a + s_{t-1} W_a))
//   c_t     = alpha_t H
//   s_t     = GRU([emb(y_{t-1}), c_t], s_{t-1})
//   logits  = [s_t, c_t] W_o + b_o
// with s_0 = tanh([h_fwd(S-1), h_bwd(0)] W_init + b_init).

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unmt/params.hpp"
#include "unmt/tape.hpp"
#include "unmt/tensor.hpp"
#include "unmt/vocab.hpp"

namespace unmt::model {

enum class Lang : std::uint8_t { kSrc = 0, kTrg = 1 };

struct Direction {
  Lang from = Lang::kSrc;
  Lang to = Lang::kTrg;
};

std::string lang_name(Lang l);
/// "src-trg" or "trg-src".
std::string direction_name(Direction d);
/// Throws std::invalid_argument for anything but the two names above.
Direction parse_direction(const std::string& name);

struct ModelConfig {
  std::size_t src_vocab = 0;
  std::size_t trg_vocab = 0;
  std::size_t emb_dim = 32;
  std::size_t hidden = 64;  // per encoder direction
  std::size_t attn_dim = 64;
  bool freeze_embeddings = true;
  double init_scale = 0.1;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Row t holds the attention over source positions when emitting token t.
using AttentionMatrix = Tensor;

struct Translation {
  Sentence tokens;            // without the end marker
  AttentionMatrix attention;  // (decoding steps) x (source length)
  bool hit_max_len = false;
};

class Seq2Seq {
 public:
  /// Random initialization: weights ~ U(-init_scale, init_scale), biases 0,
  /// embeddings random unit vectors until set_embeddings is called.
  Seq2Seq(const ModelConfig& config, std::uint64_t seed);
  /// Adopts checkpointed parameters; names and shapes must match `config`.
  Seq2Seq(const ModelConfig& config, ParameterSet params);

  const ModelConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  void set_embeddings(Lang lang, const Tensor& table);
  std::size_t vocab_size(Lang lang) const;

  /// Indices (into params()) of every tensor owned by one decoder.
  std::vector<std::size_t> decoder_parameters(Lang lang) const;
  std::vector<std::size_t> encoder_parameters() const;

  // Graph construction. `bound` is params().bind(tape).
  Var encode(Tape& tape, std::span<const Var> bound, Lang lang,
             std::span<const int> tokens) const;
  /// Mean per-token cross-entropy of `tgt` (which must end with </s>) under
  /// the `tgt_lang` decoder with teacher forcing, conditioned on `src`.
  Var decoder_loss(Tape& tape, std::span<const Var> bound, Lang src_lang,
                   std::span<const int> src, Lang tgt_lang,
                   std::span<const int> tgt) const;

  /// Encoder states as a plain tensor (S x 2*hidden).
  Tensor encode(Lang lang, std::span<const int> tokens) const;
  double loss(Lang src_lang, std::span<const int> src, Lang tgt_lang,
              std::span<const int> tgt) const;
  /// Adds weight * d(loss)/d(params) into `grads` and returns the loss.
  double accumulate_gradient(Lang src_lang, std::span<const int> src,
                             Lang tgt_lang, std::span<const int> tgt,
                             GradientBuffer& grads, double weight = 1.0) const;

  /// Greedy decoding for at most max_len steps. Pure function of the
  /// parameters and arguments.
  Translation translate(std::span<const int> src, Direction dir,
                        std::size_t max_len) const;

 private:
  struct GruIds {
    std::size_t w, u, bx, bh;
  };
  struct DecoderIds {
    std::size_t init_w, init_b, att_w, att_u, att_v, w_emb, w_ctx, u, bx, bh,
        out_w, out_b;
  };
  struct Step {
    Var state;
    Var output;  // [s_t, c_t]
    Var attention;
  };

  void build_layout(bool allocate, std::uint64_t seed);
  void check_tokens(Lang lang, std::span<const int> tokens,
                    const char* what) const;
  const DecoderIds& decoder(Lang lang) const;
  Var gru_step(Tape& tape, std::span<const Var> p, const GruIds& g,
               Var input_proj, Var h, std::size_t width) const;
  Var initial_state(Tape& tape, std::span<const Var> p, const DecoderIds& d,
                    Var enc) const;
  Step decoder_step(Tape& tape, std::span<const Var> p, const DecoderIds& d,
                    Var enc, Var enc_proj, Var emb_proj_row, Var state) const;

  ModelConfig config_;
  ParameterSet params_;
  std::array<std::size_t, 2> emb_{};
  GruIds enc_fwd_{};
  GruIds enc_bwd_{};
  std::array<DecoderIds, 2> dec_{};
};

}  // namespace unmt::model
