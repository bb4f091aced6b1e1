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

#include "unmt/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace unmt::model {

std::string lang_name(Lang l) {
  switch (l) {
    case Lang::kSrc: return "src";
    case Lang::kTrg: return "trg";
  }
  throw std::invalid_argument("unknown language tag " +
                              std::to_string(static_cast<int>(l)));
}

std::string direction_name(Direction d) {
  return lang_name(d.from) + "-" + lang_name(d.to);
}

Direction parse_direction(const std::string& name) {
  if (name == "src-trg") return {Lang::kSrc, Lang::kTrg};
  if (name == "trg-src") return {Lang::kTrg, Lang::kSrc};
  throw std::invalid_argument("unknown direction '" + name +
                              "' (expected src-trg or trg-src)");
}

void ModelConfig::validate() const {
  if (src_vocab <= kNumSpecial || trg_vocab <= kNumSpecial) {
    throw std::invalid_argument("ModelConfig: vocabularies need words beyond "
                                "the reserved tokens");
  }
  if (emb_dim == 0 || hidden == 0 || attn_dim == 0) {
    throw std::invalid_argument("ModelConfig: dimensions must be positive");
  }
  if (!(init_scale > 0.0)) {
    throw std::invalid_argument("ModelConfig: init_scale must be positive");
  }
}

namespace {

std::size_t index(Lang l) {
  const auto i = static_cast<std::size_t>(l);
  if (i > 1) {
    throw std::invalid_argument("language tag " + std::to_string(i) +
                                " has no decoder");
  }
  return i;
}

}  // namespace

Seq2Seq::Seq2Seq(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  build_layout(true, seed);
}

Seq2Seq::Seq2Seq(const ModelConfig& config, ParameterSet params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
  build_layout(false, 0);
}

void Seq2Seq::build_layout(bool allocate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-config_.init_scale,
                                             config_.init_scale);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto reg = [&](const std::string& name, std::size_t r, std::size_t c,
                 char init, bool trainable = true) {
    if (!allocate) {
      const std::size_t i = params_.index_of(name);
      const Tensor& t = params_.value(i);
      if (t.rows() != r || t.cols() != c) {
        throw std::invalid_argument("parameter '" + name + "' has shape " +
                                    t.shape_string() + ", config needs " +
                                    std::to_string(r) + "x" +
                                    std::to_string(c));
      }
      params_.set_trainable(i, trainable);
      return i;
    }
    Tensor t(r, c);
    if (init == 'u') {
      for (double& v : t.values()) v = uni(rng);
    } else if (init == 'e') {
      for (std::size_t i = 0; i < r; ++i) {
        auto row = t.row(i);
        double n = 0.0;
        for (double& v : row) {
          v = gauss(rng);
          n += v * v;
        }
        n = std::sqrt(n);
        for (double& v : row) v /= n;
      }
    }
    return params_.add(name, std::move(t), trainable);
  };

  const std::size_t d = config_.emb_dim;
  const std::size_t h = config_.hidden;
  const std::size_t D = 2 * h;
  const std::size_t a = config_.attn_dim;
  const bool emb_trainable = !config_.freeze_embeddings;

  emb_[0] = reg("emb.src", config_.src_vocab, d, 'e', emb_trainable);
  emb_[1] = reg("emb.trg", config_.trg_vocab, d, 'e', emb_trainable);
  for (auto [ids, prefix] :
       {std::pair{&enc_fwd_, "enc.fwd."}, std::pair{&enc_bwd_, "enc.bwd."}}) {
    const std::string p = prefix;
    ids->w = reg(p + "W", d, 3 * h, 'u');
    ids->u = reg(p + "U", h, 3 * h, 'u');
    ids->bx = reg(p + "bx", 1, 3 * h, '0');
    ids->bh = reg(p + "bh", 1, 3 * h, '0');
  }
  const std::array<std::size_t, 2> vocab{config_.src_vocab, config_.trg_vocab};
  for (std::size_t l = 0; l < 2; ++l) {
    const std::string p = std::string("dec.") + (l == 0 ? "src." : "trg.");
    DecoderIds& ids = dec_[l];
    ids.init_w = reg(p + "init.W", D, D, 'u');
    ids.init_b = reg(p + "init.b", 1, D, '0');
    ids.att_w = reg(p + "att.W", D, a, 'u');
    ids.att_u = reg(p + "att.U", D, a, 'u');
    ids.att_v = reg(p + "att.v", a, 1, 'u');
    ids.w_emb = reg(p + "gru.Wemb", d, 3 * D, 'u');
    ids.w_ctx = reg(p + "gru.Wctx", D, 3 * D, 'u');
    ids.u = reg(p + "gru.U", D, 3 * D, 'u');
    ids.bx = reg(p + "gru.bx", 1, 3 * D, '0');
    ids.bh = reg(p + "gru.bh", 1, 3 * D, '0');
    ids.out_w = reg(p + "out.W", 2 * D, vocab[l], 'u');
    ids.out_b = reg(p + "out.b", 1, vocab[l], '0');
  }
  if (!allocate) {
    const std::size_t expected = 2 + 8 + 2 * 12;
    if (params_.size() != expected) {
      throw std::invalid_argument("parameter set has " +
                                  std::to_string(params_.size()) +
                                  " tensors, model needs " +
                                  std::to_string(expected));
    }
  }
}

void Seq2Seq::set_embeddings(Lang lang, const Tensor& table) {
  Tensor& dst = params_.value(emb_[index(lang)]);
  if (!dst.same_shape(table)) {
    throw std::invalid_argument("set_embeddings(" + lang_name(lang) +
                                "): table " + table.shape_string() +
                                " does not match " + dst.shape_string());
  }
  dst = table;
}

std::size_t Seq2Seq::vocab_size(Lang lang) const {
  return params_.value(emb_[index(lang)]).rows();
}

std::vector<std::size_t> Seq2Seq::decoder_parameters(Lang lang) const {
  const DecoderIds& d = decoder(lang);
  return {d.init_w, d.init_b, d.att_w, d.att_u, d.att_v, d.w_emb,
          d.w_ctx,  d.u,      d.bx,    d.bh,    d.out_w, d.out_b};
}

std::vector<std::size_t> Seq2Seq::encoder_parameters() const {
  return {enc_fwd_.w, enc_fwd_.u, enc_fwd_.bx, enc_fwd_.bh,
          enc_bwd_.w, enc_bwd_.u, enc_bwd_.bx, enc_bwd_.bh};
}

const Seq2Seq::DecoderIds& Seq2Seq::decoder(Lang lang) const {
  return dec_[index(lang)];
}

void Seq2Seq::check_tokens(Lang lang, std::span<const int> tokens,
                           const char* what) const {
  if (tokens.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty sentence");
  }
  const std::size_t v = vocab_size(lang);
  for (int t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= v) {
      throw std::invalid_argument(std::string(what) + ": token id " +
                                  std::to_string(t) + " outside " +
                                  lang_name(lang) + " vocabulary of size " +
                                  std::to_string(v));
    }
  }
}

Var Seq2Seq::gru_step(Tape& tape, std::span<const Var> p, const GruIds& g,
                      Var input_proj, Var h, std::size_t width) const {
  // input_proj already includes bx.
  const Var hp = tape.add_row(tape.matmul(h, p[g.u]), p[g.bh]);
  const Var gates = tape.sigmoid(tape.add(tape.slice_cols(input_proj, 0, 2 * width),
                                          tape.slice_cols(hp, 0, 2 * width)));
  const Var r = tape.slice_cols(gates, 0, width);
  const Var z = tape.slice_cols(gates, width, width);
  const Var n = tape.tanh(
      tape.add(tape.slice_cols(input_proj, 2 * width, width),
               tape.mul(r, tape.slice_cols(hp, 2 * width, width))));
  // (1 - z) * n + z * h
  return tape.add(n, tape.mul(z, tape.sub(h, n)));
}

Var Seq2Seq::encode(Tape& tape, std::span<const Var> p, Lang lang,
                    std::span<const int> tokens) const {
  check_tokens(lang, tokens, "encode");
  const std::size_t h = config_.hidden;
  const std::size_t S = tokens.size();
  const Var x = tape.lookup(p[emb_[index(lang)]], tokens);
  const Var xf = tape.add_row(tape.matmul(x, p[enc_fwd_.w]), p[enc_fwd_.bx]);
  const Var xb = tape.add_row(tape.matmul(x, p[enc_bwd_.w]), p[enc_bwd_.bx]);
  const Var zero = tape.constant(Tensor(1, h));

  std::vector<Var> fwd(S), bwd(S);
  Var state = zero;
  for (std::size_t t = 0; t < S; ++t) {
    state = gru_step(tape, p, enc_fwd_, tape.slice_rows(xf, t, 1), state, h);
    fwd[t] = state;
  }
  state = zero;
  for (std::size_t t = S; t-- > 0;) {
    state = gru_step(tape, p, enc_bwd_, tape.slice_rows(xb, t, 1), state, h);
    bwd[t] = state;
  }
  const std::array<Var, 2> halves{tape.vconcat(fwd), tape.vconcat(bwd)};
  return tape.hconcat(halves);
}

Var Seq2Seq::initial_state(Tape& tape, std::span<const Var> p,
                           const DecoderIds& d, Var enc) const {
  const std::size_t h = config_.hidden;
  const std::size_t S = tape.value(enc).rows();
  const std::array<Var, 2> ends{
      tape.slice_cols(tape.slice_rows(enc, S - 1, 1), 0, h),
      tape.slice_cols(tape.slice_rows(enc, 0, 1), h, h)};
  return tape.tanh(
      tape.add_row(tape.matmul(tape.hconcat(ends), p[d.init_w]), p[d.init_b]));
}

Seq2Seq::Step Seq2Seq::decoder_step(Tape& tape, std::span<const Var> p,
                                    const DecoderIds& d, Var enc, Var enc_proj,
                                    Var emb_proj_row, Var state) const {
  const std::size_t D = 2 * config_.hidden;
  const Var query = tape.matmul(state, p[d.att_w]);
  const Var energy = tape.tanh(tape.add_row(enc_proj, query));
  const Var scores = tape.transpose(tape.matmul(energy, p[d.att_v]));
  const Var alpha = tape.softmax_rows(scores);
  const Var ctx = tape.matmul(alpha, enc);
  const Var input_proj = tape.add(emb_proj_row, tape.matmul(ctx, p[d.w_ctx]));
  const GruIds g{0, d.u, 0, d.bh};
  const Var next = gru_step(tape, p, g, input_proj, state, D);
  const std::array<Var, 2> out{next, ctx};
  return Step{next, tape.hconcat(out), alpha};
}

Var Seq2Seq::decoder_loss(Tape& tape, std::span<const Var> p, Lang src_lang,
                          std::span<const int> src, Lang tgt_lang,
                          std::span<const int> tgt) const {
  const DecoderIds& d = decoder(tgt_lang);
  check_tokens(tgt_lang, tgt, "decoder_loss");
  if (tgt.back() != kEos) {
    throw std::invalid_argument("decoder_loss: target must end with </s>");
  }
  const Var enc = encode(tape, p, src_lang, src);
  const Var enc_proj = tape.matmul(enc, p[d.att_u]);

  const std::size_t T = tgt.size();
  std::vector<int> prev(T);
  prev[0] = kSos;
  for (std::size_t t = 1; t < T; ++t) prev[t] = tgt[t - 1];
  const Var emb = tape.lookup(p[emb_[index(tgt_lang)]], prev);
  const Var emb_proj = tape.add_row(tape.matmul(emb, p[d.w_emb]), p[d.bx]);

  Var state = initial_state(tape, p, d, enc);
  std::vector<Var> outputs;
  outputs.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const Step s = decoder_step(tape, p, d, enc, enc_proj,
                                tape.slice_rows(emb_proj, t, 1), state);
    state = s.state;
    outputs.push_back(s.output);
  }
  const Var logits =
      tape.add_row(tape.matmul(tape.vconcat(outputs), p[d.out_w]), p[d.out_b]);
  return tape.cross_entropy(logits, tgt);
}

Tensor Seq2Seq::encode(Lang lang, std::span<const int> tokens) const {
  Tape tape;
  const auto bound = params_.bind(tape);
  return tape.value(encode(tape, bound, lang, tokens));
}

double Seq2Seq::loss(Lang src_lang, std::span<const int> src, Lang tgt_lang,
                     std::span<const int> tgt) const {
  Tape tape;
  const auto bound = params_.bind(tape);
  return tape.value(decoder_loss(tape, bound, src_lang, src, tgt_lang, tgt))[0];
}

double Seq2Seq::accumulate_gradient(Lang src_lang, std::span<const int> src,
                                    Lang tgt_lang, std::span<const int> tgt,
                                    GradientBuffer& grads,
                                    double weight) const {
  Tape tape;
  const auto bound = params_.bind(tape);
  const Var loss = decoder_loss(tape, bound, src_lang, src, tgt_lang, tgt);
  grads.accumulate(tape.backward(loss), bound, weight);
  return tape.value(loss)[0];
}

Translation Seq2Seq::translate(std::span<const int> src, Direction dir,
                               std::size_t max_len) const {
  if (max_len == 0) throw std::invalid_argument("translate: max_len must be >= 1");
  const DecoderIds& d = decoder(dir.to);
  Tape tape;
  std::vector<Var> p;
  p.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    p.push_back(tape.leaf(params_.value(i), false));
  }
  const Var enc = encode(tape, p, dir.from, src);
  const Var enc_proj = tape.matmul(enc, p[d.att_u]);
  const Var emb_table = p[emb_[index(dir.to)]];

  Translation out;
  std::vector<Var> rows;
  Var state = initial_state(tape, p, d, enc);
  int prev = kSos;
  bool finished = false;
  for (std::size_t t = 0; t < max_len; ++t) {
    const std::array<int, 1> prev_id{prev};
    const Var emb_proj = tape.add_row(
        tape.matmul(tape.lookup(emb_table, prev_id), p[d.w_emb]), p[d.bx]);
    const Step s = decoder_step(tape, p, d, enc, enc_proj, emb_proj, state);
    state = s.state;
    rows.push_back(s.attention);
    const Tensor& logits = tape.value(
        tape.add_row(tape.matmul(s.output, p[d.out_w]), p[d.out_b]));
    // Reserved ids other than </s> never occur in training targets.
    int best = kEos;
    for (std::size_t j = kNumSpecial; j < logits.cols(); ++j) {
      if (logits[j] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
    }
    if (best == kEos) {
      finished = true;
      break;
    }
    out.tokens.push_back(best);
    prev = best;
  }
  out.hit_max_len = !finished;
  out.attention = tape.value(tape.vconcat(rows));
  return out;
}

}  // namespace unmt::model
