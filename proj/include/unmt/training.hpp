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

// Two-phase unsupervised training. Every iteration runs one batch of each of
// four sub-tasks. Iterations 1..M use the noisy rotation
//   DAE_src, DAE_trg, BTS_src, BTS_trg
// and, in retrain mode, iterations M+1..N switch to the clean rotation
//   AE_src, AE_trg, BT_src, BT_trg.
// Back-translated inputs are produced by the current parameters at the time
// of the step.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "unmt/corpus.hpp"
#include "unmt/kernels.hpp"
#include "unmt/model.hpp"
#include "unmt/params.hpp"

namespace unmt::train {

using model::Lang;

enum class SubTask : std::uint8_t {
  kDaeSrc,
  kDaeTrg,
  kBtsSrc,
  kBtsTrg,
  kAeSrc,
  kAeTrg,
  kBtSrc,
  kBtTrg,
};

std::string_view subtask_name(SubTask t);
bool uses_noise(SubTask t);
bool is_back_translation(SubTask t);
/// Language of the monolingual sentences the task consumes. It is also the
/// language of the decoder being trained (the sentence is the output).
Lang data_lang(SubTask t);
/// Language of the encoder input: data_lang for (D)AE, the other language
/// for back-translation tasks.
Lang input_lang(SubTask t);

enum class Mode : std::uint8_t { kBaseline, kRetrain };
std::string_view mode_name(Mode m);
Mode parse_mode(const std::string& name);

struct TrainConfig {
  std::size_t iterations = 3000;  // N
  std::size_t switch_at = 1500;   // M
  std::size_t eval_every = 100;
  std::size_t batch_size = 8;
  double lr = 0.05;
  double clip_norm = 5.0;
  std::size_t max_len = 40;
  std::uint64_t seed = 1;
  Mode mode = Mode::kRetrain;
  model::ModelConfig model;
  kernels::Exec exec = kernels::Exec::Serial;

  /// Throws std::invalid_argument unless 0 < M < N, eval_every divides N,
  /// and the optimizer settings are positive.
  void validate() const;
};

using Rotation = std::array<SubTask, 4>;
inline constexpr Rotation kNoisyRotation{SubTask::kDaeSrc, SubTask::kDaeTrg,
                                         SubTask::kBtsSrc, SubTask::kBtsTrg};
inline constexpr Rotation kCleanRotation{SubTask::kAeSrc, SubTask::kAeTrg,
                                         SubTask::kBtSrc, SubTask::kBtTrg};

/// Rotation for a 1-based iteration.
Rotation rotation_at(const TrainConfig& config, std::size_t iteration);
/// The full flattened schedule: 4 * N sub-tasks.
std::vector<SubTask> make_schedule(const TrainConfig& config);

/// Sampling without replacement, reshuffled at each epoch boundary.
class EpochSampler {
 public:
  EpochSampler(std::size_t population, std::uint64_t seed);
  std::vector<std::size_t> next(std::size_t count);

 private:
  void reshuffle();
  std::vector<std::size_t> order_;
  std::size_t at_ = 0;
  std::mt19937_64 rng_;
};

struct CurvePoint {
  std::size_t iteration = 0;
  model::Direction direction;
  double bleu = 0.0;
};

/// CSV with header "iteration,direction,bleu", BLEU to 4 decimals.
std::string curve_csv(std::span<const CurvePoint> curve);

struct Snapshot {
  std::size_t iteration = 0;
  ParameterSet params;
  std::string rng_state;
};

struct StepResult {
  double loss = 0.0;             // batch mean of per-sentence mean NLL
  std::size_t noised_inputs = 0;
  std::size_t back_translations = 0;
};

struct TrainingData {
  std::vector<Sentence> mono_src;
  std::vector<Sentence> mono_trg;
  corpus::ParallelCorpus dev;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Trainer {
 public:
  /// Initializes the model from config.seed and installs the embeddings.
  Trainer(const TrainConfig& config, TrainingData data,
          const corpus::EmbeddingTables& embeddings);

  const TrainConfig& config() const { return config_; }
  model::Seq2Seq& model() { return model_; }
  const model::Seq2Seq& model() const { return model_; }

  /// One gradient step of `task` on `batch`, whose sentences must be in
  /// `batch_lang` == data_lang(task). Sentence i draws its noise from
  /// derive_seed(step_seed, i).
  StepResult run_subtask(SubTask task, Lang batch_lang,
                         std::span<const Sentence> batch,
                         std::uint64_t step_seed);

  struct Result {
    std::vector<CurvePoint> curve;
    std::vector<Snapshot> checkpoints;  // at M and N
    std::vector<double> iteration_loss;  // mean over the 4 sub-tasks
  };
  using Progress = std::function<void(std::size_t iteration,
                                      std::span<const CurvePoint> latest)>;

  /// Runs the whole schedule from the current state (iteration 0).
  Result train(const Progress& progress = {});

  /// Dev BLEU of the current parameters in one direction.
  double dev_bleu(model::Direction dir) const;

  std::string rng_state() const;

 private:
  TrainConfig config_;
  TrainingData data_;
  model::Seq2Seq model_;
  std::mt19937_64 rng_;
  std::array<EpochSampler, 4> samplers_;
};

/// Greedy-translates a list of sentences; sentence i lands in slot i.
std::vector<model::Translation> translate_all(const model::Seq2Seq& m,
                                              std::span<const Sentence> src,
                                              model::Direction dir,
                                              std::size_t max_len,
                                              kernels::Exec exec);

/// Batch gradient: mean over sentences of d(loss_i)/d(params). Per-sentence
/// gradients are reduced in index order, so both Exec flavours agree bit
/// for bit.
struct Example {
  Lang src_lang;
  Sentence src;  // including </s>
  Lang tgt_lang;
  Sentence tgt;  // including </s>
};
double batch_gradient(const model::Seq2Seq& m, std::span<const Example> batch,
                      GradientBuffer& out, kernels::Exec exec);

}  // namespace unmt::train
