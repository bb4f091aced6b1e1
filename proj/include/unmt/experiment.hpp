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

// Experiment plumbing shared by the CLI and the acceptance suite: config
// files, the on-disk data layout, and text reports.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "unmt/checkpoint.hpp"
#include "unmt/corpus.hpp"
#include "unmt/eval.hpp"
#include "unmt/training.hpp"

namespace unmt::experiment {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string data_dir = "data/toy";

  std::size_t hidden = 64;
  std::size_t attn_dim = 64;
  double init_scale = 0.1;
  bool freeze_embeddings = true;

  std::size_t iterations = 3000;
  std::size_t switch_at = 0;  // 0 means iterations / 2
  std::size_t eval_every = 100;
  std::size_t batch_size = 8;
  double lr = 0.05;
  double clip_norm = 5.0;
  std::size_t max_len = 40;
  bool parallel = true;
  int threads = 0;  // 0 keeps the OpenMP default

  std::size_t bootstrap_samples = 1000;
  double alpha = 0.05;
  double tau1 = 0.6;
  double tau2 = 0.3;

  std::size_t effective_switch() const {
    return switch_at ? switch_at : iterations / 2;
  }
  kernels::Exec exec() const {
    return parallel ? kernels::Exec::Parallel : kernels::Exec::Serial;
  }
};

/// Every recognised dotted key, in documentation order.
const std::vector<std::string>& config_keys();

/// Throws std::invalid_argument on unknown keys or ill-typed values.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Applies "section.key=value"; flags given on the command line win.
void apply_override(ExperimentConfig& config, const std::string& assignment);
/// Canonical JSON rendering, stored in checkpoints.
std::string config_json(const ExperimentConfig& config);

std::uint64_t data_seed(std::uint64_t seed);
std::uint64_t train_seed(std::uint64_t seed);
std::uint64_t bootstrap_seed(std::uint64_t seed);

/// Data directory layout written by generate_data.
struct DataFiles {
  static constexpr const char* kVocabSrc = "vocab.src";
  static constexpr const char* kVocabTrg = "vocab.trg";
  static constexpr const char* kMonoSrc = "train.src";
  static constexpr const char* kMonoTrg = "train.trg";
  static constexpr const char* kDevSrc = "dev.src";
  static constexpr const char* kDevTrg = "dev.trg";
  static constexpr const char* kTestSrc = "test.src";
  static constexpr const char* kTestTrg = "test.trg";
  static constexpr const char* kEmbSrc = "emb.src.vec";
  static constexpr const char* kEmbTrg = "emb.trg.vec";
};

struct DataSet {
  corpus::Vocabularies vocabs;
  std::vector<Sentence> mono_src;
  std::vector<Sentence> mono_trg;
  corpus::ParallelCorpus dev;
  corpus::ParallelCorpus test;
  corpus::EmbeddingTables embeddings;
};

/// Generates the synthetic language pair with randomness from data_seed(seed).
/// Returns the list of files written.
std::vector<std::string> generate_data(const corpus::LanguagePairSpec& spec,
                                       std::uint64_t seed,
                                       const std::string& out_dir);
DataSet load_data(const std::string& dir);

train::TrainConfig make_train_config(const ExperimentConfig& config,
                                     const DataSet& data, train::Mode mode);

struct TrainOutputs {
  train::Trainer::Result result;
  std::vector<std::string> files;
};

/// Trains one mode and writes ckpt_<iteration> files plus curve.csv.
TrainOutputs train_and_save(const ExperimentConfig& config, const DataSet& data,
                            train::Mode mode, const std::string& out_dir,
                            const train::Trainer::Progress& progress = {});

Checkpoint make_checkpoint(const ExperimentConfig& config, const DataSet& data,
                           const train::Snapshot& snap);

/// Test-set output of one model in one direction.
struct DirectionEval {
  model::Direction direction;
  std::vector<Sentence> hyps;
  std::vector<Tensor> attention;
  eval::BleuReport bleu;
  double scrambled_fraction = 0.0;
  double mean_entropy = 0.0;  // pooled over all decoded rows
};

DirectionEval evaluate_direction(const model::Seq2Seq& m,
                                 const corpus::ParallelCorpus& test,
                                 model::Direction dir,
                                 const ExperimentConfig& config);

// Text reports, "key = value" per line.
std::string bleu_report_text(const eval::BleuReport& r,
                             double scrambled_fraction);
std::string bootstrap_report_text(const eval::BootstrapResult& r);
std::string diagnosis_text(const eval::ScrambleSummary& s);

/// Parses "key = value" lines, keeping order.
std::vector<std::pair<std::string, std::string>> parse_report(
    const std::string& text);

/// Baseline vs retrain on the test set, both directions.
struct Comparison {
  std::array<DirectionEval, 2> baseline;
  std::array<DirectionEval, 2> retrain;
  std::array<eval::BootstrapResult, 2> significance;
  // dev BLEU of the retrain run at M and at N, per direction
  std::array<double, 2> retrain_dev_at_m{};
  std::array<double, 2> retrain_dev_at_n{};
  bool phase1_identical = false;
  std::string report;  // comparison.txt contents
};

/// Runs both modes on `data`, writes <out>/{baseline,retrain}/ and
/// <out>/comparison.txt, and returns the numbers behind the report.
Comparison run_comparison(const ExperimentConfig& config, const DataSet& data,
                          const std::string& out_dir,
                          const train::Trainer::Progress& progress = {});

}  // namespace unmt::experiment
