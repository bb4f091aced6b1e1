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

#include <cmath>
#include <random>

#include "doctest.h"
#include "unmt/noise.hpp"
#include "unmt/training.hpp"

using namespace unmt;
using namespace unmt::train;

namespace {

constexpr std::size_t kVocab = 14;

struct Fixture {
  TrainConfig config;
  TrainingData data;
  corpus::EmbeddingTables emb;
};

// Random sentences over a shift cipher; enough structure to train on.
Fixture make_fixture(std::size_t min_len = 2, std::size_t max_len = 5) {
  Fixture f;
  f.config.iterations = 8;
  f.config.switch_at = 4;
  f.config.eval_every = 4;
  f.config.batch_size = 3;
  f.config.lr = 0.5;
  f.config.max_len = 8;
  f.config.seed = 42;
  f.config.model.src_vocab = kVocab;
  f.config.model.trg_vocab = kVocab;
  f.config.model.emb_dim = 6;
  f.config.model.hidden = 6;
  f.config.model.attn_dim = 6;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> tok(kNumSpecial, kVocab - 1);
  auto sentence = [&] {
    Sentence s(len(rng));
    for (int& t : s) t = tok(rng);
    return s;
  };
  auto cipher = [](const Sentence& s) {
    Sentence t;
    for (int w : s) t.push_back(kNumSpecial + (w - kNumSpecial + 3) % (kVocab - kNumSpecial));
    return t;
  };
  for (int i = 0; i < 20; ++i) f.data.mono_src.push_back(sentence());
  for (int i = 0; i < 20; ++i) f.data.mono_trg.push_back(cipher(sentence()));
  for (int i = 0; i < 4; ++i) {
    f.data.dev.src.push_back(sentence());
    f.data.dev.trg.push_back(cipher(f.data.dev.src.back()));
  }
  f.emb.src = Tensor(kVocab, 6);
  std::normal_distribution<double> g;
  for (double& v : f.emb.src.values()) v = g(rng);
  f.emb.trg = f.emb.src;
  return f;
}

}  // namespace

TEST_CASE("sub-task metadata") {
  CHECK(subtask_name(SubTask::kBtsTrg) == "BTS_trg");
  CHECK(uses_noise(SubTask::kDaeSrc));
  CHECK(uses_noise(SubTask::kBtsSrc));
  CHECK_FALSE(uses_noise(SubTask::kAeTrg));
  CHECK_FALSE(uses_noise(SubTask::kBtTrg));
  CHECK(is_back_translation(SubTask::kBtSrc));
  CHECK(data_lang(SubTask::kBtsTrg) == Lang::kSrc);
  CHECK(input_lang(SubTask::kBtsTrg) == Lang::kTrg);
  CHECK(data_lang(SubTask::kAeTrg) == Lang::kTrg);
  CHECK(input_lang(SubTask::kAeTrg) == Lang::kTrg);
}

TEST_CASE("schedule switches rotations after M in retrain mode") {
  TrainConfig c;
  c.iterations = 4;
  c.switch_at = 2;
  c.eval_every = 2;
  c.model.src_vocab = c.model.trg_vocab = 10;
  c.mode = Mode::kRetrain;
  const auto s = make_schedule(c);
  REQUIRE(s.size() == 16);
  CHECK(s[0] == SubTask::kDaeSrc);
  CHECK(s[7] == SubTask::kBtsTrg);
  CHECK(s[8] == SubTask::kAeSrc);
  CHECK(s[15] == SubTask::kBtTrg);
  c.mode = Mode::kBaseline;
  for (SubTask t : make_schedule(c)) CHECK(uses_noise(t));
  CHECK_THROWS_AS(rotation_at(c, 0), std::out_of_range);
  c.switch_at = 4;
  CHECK_THROWS_AS(make_schedule(c), std::invalid_argument);
}

TEST_CASE("epoch sampler visits every index once per epoch") {
  EpochSampler s(7, 3);
  auto a = s.next(7);
  std::sort(a.begin(), a.end());
  for (std::size_t i = 0; i < 7; ++i) CHECK(a[i] == i);
  CHECK(s.next(10).size() == 10);
}

TEST_CASE("clean sub-tasks never invoke the noise model") {
  Fixture f = make_fixture();
  Trainer tr(f.config, f.data, f.emb);
  const std::vector<Sentence> src(f.data.mono_src.begin(), f.data.mono_src.begin() + 3);
  const std::vector<Sentence> trg(f.data.mono_trg.begin(), f.data.mono_trg.begin() + 3);
  const auto before = noise::invocation_count();
  auto r = tr.run_subtask(SubTask::kAeSrc, Lang::kSrc, src, 1);
  r = tr.run_subtask(SubTask::kBtTrg, Lang::kSrc, src, 2);
  CHECK(r.back_translations == 3);
  CHECK(r.noised_inputs == 0);
  CHECK(noise::invocation_count() == before);
  r = tr.run_subtask(SubTask::kDaeTrg, Lang::kTrg, trg, 3);
  CHECK(r.noised_inputs == 3);
  CHECK(noise::invocation_count() == before + 3);
  CHECK_THROWS_AS(tr.run_subtask(SubTask::kDaeTrg, Lang::kSrc, src, 3),
                  std::invalid_argument);
}

TEST_CASE("back-translation leaves the inference decoder untouched") {
  Fixture f = make_fixture();
  Trainer tr(f.config, f.data, f.emb);
  const std::vector<Sentence> src(f.data.mono_src.begin(), f.data.mono_src.begin() + 3);
  const ParameterSet before = tr.model().params();
  // BT_trg: translate source data into the target language, learn to restore it.
  tr.run_subtask(SubTask::kBtTrg, Lang::kSrc, src, 5);
  const ParameterSet& after = tr.model().params();
  for (std::size_t i : tr.model().decoder_parameters(Lang::kTrg)) {
    CHECK(after.value(i) == before.value(i));
  }
  bool moved = false;
  for (std::size_t i : tr.model().decoder_parameters(Lang::kSrc)) {
    moved = moved || !(after.value(i) == before.value(i));
  }
  CHECK(moved);
}

TEST_CASE("denoising equals plain autoencoding for one-word sentences") {
  Fixture f = make_fixture(1, 1);
  Trainer a(f.config, f.data, f.emb);
  Trainer b(f.config, f.data, f.emb);
  const std::vector<Sentence> batch(f.data.mono_src.begin(), f.data.mono_src.begin() + 3);
  const auto ra = a.run_subtask(SubTask::kDaeSrc, Lang::kSrc, batch, 9);
  const auto rb = b.run_subtask(SubTask::kAeSrc, Lang::kSrc, batch, 9);
  CHECK(ra.loss == rb.loss);
  CHECK(a.model().params() == b.model().params());
}

TEST_CASE("autoencoding single words drops below uniform loss") {
  Fixture f = make_fixture(1, 1);
  Trainer tr(f.config, f.data, f.emb);
  double last = 0;
  EpochSampler s(f.data.mono_src.size(), 1);
  for (int step = 0; step < 200; ++step) {
    std::vector<Sentence> batch;
    for (std::size_t i : s.next(3)) batch.push_back(f.data.mono_src[i]);
    last = tr.run_subtask(SubTask::kAeSrc, Lang::kSrc, batch, static_cast<std::uint64_t>(step)).loss;
  }
  CHECK(last < std::log(static_cast<double>(kVocab)));
}

TEST_CASE("baseline and retrain agree bit for bit through M") {
  Fixture f = make_fixture();
  f.config.mode = Mode::kBaseline;
  Trainer base(f.config, f.data, f.emb);
  const auto rb = base.train();
  f.config.mode = Mode::kRetrain;
  Trainer retrain(f.config, f.data, f.emb);
  const auto rr = retrain.train();
  REQUIRE(rb.checkpoints.size() == 2);
  REQUIRE(rr.checkpoints.size() == 2);
  CHECK(rb.checkpoints[0].iteration == f.config.switch_at);
  CHECK(rb.checkpoints[0].params == rr.checkpoints[0].params);
  CHECK(rb.checkpoints[0].rng_state == rr.checkpoints[0].rng_state);
  for (std::size_t i = 0; i < f.config.switch_at; ++i) {
    CHECK(rb.iteration_loss[i] == rr.iteration_loss[i]);
  }
  CHECK_FALSE(rb.checkpoints[1].params == rr.checkpoints[1].params);
}

TEST_CASE("training is deterministic and serial equals parallel") {
  Fixture f = make_fixture();
  Trainer a(f.config, f.data, f.emb);
  const auto ra = a.train();
  f.config.exec = kernels::Exec::Parallel;
  Trainer b(f.config, f.data, f.emb);
  const auto rb = b.train();
  CHECK(curve_csv(ra.curve) == curve_csv(rb.curve));
  CHECK(ra.checkpoints[1].params == rb.checkpoints[1].params);
  CHECK(ra.curve.size() == 4);
}

TEST_CASE("curve CSV format") {
  const std::vector<CurvePoint> pts{{100, {Lang::kSrc, Lang::kTrg}, 12.345678},
                                    {100, {Lang::kTrg, Lang::kSrc}, 0.0}};
  CHECK(curve_csv(pts) ==
        "iteration,direction,bleu\n100,src-trg,12.3457\n100,trg-src,0.0000\n");
}
