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

#include "unmt/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "unmt/eval.hpp"
#include "unmt/noise.hpp"
#include "unmt/seeds.hpp"

namespace unmt::train {

std::string_view subtask_name(SubTask t) {
  switch (t) {
    case SubTask::kDaeSrc: return "DAE_src";
    case SubTask::kDaeTrg: return "DAE_trg";
    case SubTask::kBtsSrc: return "BTS_src";
    case SubTask::kBtsTrg: return "BTS_trg";
    case SubTask::kAeSrc: return "AE_src";
    case SubTask::kAeTrg: return "AE_trg";
    case SubTask::kBtSrc: return "BT_src";
    case SubTask::kBtTrg: return "BT_trg";
  }
  return "?";
}

bool uses_noise(SubTask t) {
  return t == SubTask::kDaeSrc || t == SubTask::kDaeTrg ||
         t == SubTask::kBtsSrc || t == SubTask::kBtsTrg;
}

bool is_back_translation(SubTask t) {
  return t == SubTask::kBtsSrc || t == SubTask::kBtsTrg ||
         t == SubTask::kBtSrc || t == SubTask::kBtTrg;
}

Lang data_lang(SubTask t) {
  switch (t) {
    case SubTask::kDaeSrc:
    case SubTask::kAeSrc:
    case SubTask::kBtsTrg:  // src sentence -> synthetic trg -> src decoder
    case SubTask::kBtTrg:
      return Lang::kSrc;
    default:
      return Lang::kTrg;
  }
}

Lang input_lang(SubTask t) {
  const Lang d = data_lang(t);
  if (!is_back_translation(t)) return d;
  return d == Lang::kSrc ? Lang::kTrg : Lang::kSrc;
}

std::string_view mode_name(Mode m) {
  return m == Mode::kBaseline ? "baseline" : "retrain";
}

Mode parse_mode(const std::string& name) {
  if (name == "baseline") return Mode::kBaseline;
  if (name == "retrain") return Mode::kRetrain;
  throw std::invalid_argument("unknown mode '" + name +
                              "' (expected baseline or retrain)");
}

void TrainConfig::validate() const {
  if (iterations == 0) throw std::invalid_argument("iterations must be >= 1");
  if (switch_at == 0 || switch_at >= iterations) {
    throw std::invalid_argument("switch iteration M=" +
                                std::to_string(switch_at) +
                                " must satisfy 0 < M < N=" +
                                std::to_string(iterations));
  }
  if (eval_every == 0 || iterations % eval_every != 0) {
    throw std::invalid_argument("eval_every=" + std::to_string(eval_every) +
                                " must divide N=" + std::to_string(iterations));
  }
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be > 0");
  if (max_len == 0) throw std::invalid_argument("max_len must be >= 1");
  model.validate();
}

Rotation rotation_at(const TrainConfig& config, std::size_t iteration) {
  if (iteration == 0 || iteration > config.iterations) {
    throw std::out_of_range("iteration " + std::to_string(iteration) +
                            " outside 1.." + std::to_string(config.iterations));
  }
  if (config.mode == Mode::kRetrain && iteration > config.switch_at) {
    return kCleanRotation;
  }
  return kNoisyRotation;
}

std::vector<SubTask> make_schedule(const TrainConfig& config) {
  config.validate();
  std::vector<SubTask> out;
  out.reserve(4 * config.iterations);
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    const Rotation r = rotation_at(config, it);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

EpochSampler::EpochSampler(std::size_t population, std::uint64_t seed)
    : order_(population), rng_(seed) {
  if (population == 0) {
    throw std::invalid_argument("EpochSampler: empty population");
  }
  std::iota(order_.begin(), order_.end(), 0);
  reshuffle();
}

void EpochSampler::reshuffle() {
  std::shuffle(order_.begin(), order_.end(), rng_);
  at_ = 0;
}

std::vector<std::size_t> EpochSampler::next(std::size_t count) {
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count) {
    if (at_ == order_.size()) reshuffle();
    out.push_back(order_[at_++]);
  }
  return out;
}

std::string curve_csv(std::span<const CurvePoint> curve) {
  std::string out = "iteration,direction,bleu\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.4f\n", p.iteration,
                  model::direction_name(p.direction).c_str(), p.bleu);
    out += buf;
  }
  return out;
}

std::vector<model::Translation> translate_all(const model::Seq2Seq& m,
                                              std::span<const Sentence> src,
                                              model::Direction dir,
                                              std::size_t max_len,
                                              kernels::Exec exec) {
  std::vector<model::Translation> out(src.size());
  kernels::for_each_index(exec, src.size(), [&](std::size_t i) {
    Sentence input = src[i];
    input.push_back(kEos);
    out[i] = m.translate(input, dir, max_len);
  });
  return out;
}

double batch_gradient(const model::Seq2Seq& m, std::span<const Example> batch,
                      GradientBuffer& out, kernels::Exec exec) {
  if (batch.empty()) throw std::invalid_argument("batch_gradient: empty batch");
  const double weight = 1.0 / static_cast<double>(batch.size());
  std::vector<GradientBuffer> parts(batch.size(), GradientBuffer(m.params()));
  std::vector<double> losses(batch.size(), 0.0);
  kernels::for_each_index(exec, batch.size(), [&](std::size_t i) {
    const Example& e = batch[i];
    losses[i] = m.accumulate_gradient(e.src_lang, e.src, e.tgt_lang, e.tgt,
                                      parts[i], weight);
  });
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.add(parts[i]);
    loss += losses[i];
  }
  return loss / static_cast<double>(batch.size());
}

Trainer::Trainer(const TrainConfig& config, TrainingData data,
                 const corpus::EmbeddingTables& embeddings)
    : config_(config),
      data_(std::move(data)),
      model_((config_.validate(), config_.model),
             derive_seed(config_.seed, 0)),
      rng_(derive_seed(config_.seed, 1)),
      samplers_{EpochSampler(data_.mono_src.size(), derive_seed(config_.seed, 10)),
                EpochSampler(data_.mono_trg.size(), derive_seed(config_.seed, 11)),
                EpochSampler(data_.mono_trg.size(), derive_seed(config_.seed, 12)),
                EpochSampler(data_.mono_src.size(), derive_seed(config_.seed, 13))} {
  model_.set_embeddings(Lang::kSrc, embeddings.src);
  model_.set_embeddings(Lang::kTrg, embeddings.trg);
  if (data_.dev.src.size() != data_.dev.trg.size() || data_.dev.src.empty()) {
    throw std::invalid_argument("Trainer: dev set must be non-empty and parallel");
  }
}

StepResult Trainer::run_subtask(SubTask task, Lang batch_lang,
                                std::span<const Sentence> batch,
                                std::uint64_t step_seed) {
  if (batch_lang != data_lang(task)) {
    throw std::invalid_argument(std::string(subtask_name(task)) + " needs " +
                                model::lang_name(data_lang(task)) +
                                " sentences, got a " +
                                model::lang_name(batch_lang) + " batch");
  }
  if (batch.empty()) throw std::invalid_argument("run_subtask: empty batch");
  const Lang out_lang = data_lang(task);
  const Lang in_lang = input_lang(task);
  const bool bt = is_back_translation(task);
  const bool noisy = uses_noise(task);

  // Inputs are built from the parameters as they are before this step.
  std::vector<Example> examples(batch.size());
  kernels::for_each_index(config_.exec, batch.size(), [&](std::size_t i) {
    Example& e = examples[i];
    e.tgt_lang = out_lang;
    e.src_lang = in_lang;
    Sentence input;
    if (bt) {
      Sentence query = batch[i];
      query.push_back(kEos);
      input = model_.translate(query, {out_lang, in_lang}, config_.max_len).tokens;
    } else {
      input = batch[i];
    }
    if (noisy) {
      std::mt19937_64 rng(derive_seed(step_seed, i));
      input = noise::corrupt(input, rng);
    }
    input.push_back(kEos);
    e.src = std::move(input);
    e.tgt = batch[i];
    e.tgt.push_back(kEos);
  });

  GradientBuffer grads(model_.params());
  StepResult r;
  r.loss = batch_gradient(model_, examples, grads, config_.exec);
  if (!std::isfinite(r.loss)) {
    throw TrainingError(std::string(subtask_name(task)) + ": non-finite loss");
  }
  sgd_step(model_.params(), grads, config_.lr, config_.clip_norm);
  r.noised_inputs = noisy ? batch.size() : 0;
  r.back_translations = bt ? batch.size() : 0;
  return r;
}

double Trainer::dev_bleu(model::Direction dir) const {
  const auto& src = dir.from == Lang::kSrc ? data_.dev.src : data_.dev.trg;
  const auto& ref = dir.from == Lang::kSrc ? data_.dev.trg : data_.dev.src;
  const auto out = translate_all(model_, src, dir, config_.max_len, config_.exec);
  std::vector<Sentence> hyps;
  hyps.reserve(out.size());
  for (const auto& t : out) hyps.push_back(t.tokens);
  return eval::corpus_bleu(hyps, ref).bleu;
}

std::string Trainer::rng_state() const {
  std::ostringstream os;
  os << rng_;
  return os.str();
}

Trainer::Result Trainer::train(const Progress& progress) {
  Result result;
  result.iteration_loss.reserve(config_.iterations);
  for (std::size_t it = 1; it <= config_.iterations; ++it) {
    const Rotation rotation = rotation_at(config_, it);
    double loss_sum = 0.0;
    for (std::size_t slot = 0; slot < rotation.size(); ++slot) {
      const SubTask task = rotation[slot];
      const Lang lang = data_lang(task);
      const auto& pool = lang == Lang::kSrc ? data_.mono_src : data_.mono_trg;
      std::vector<Sentence> batch;
      batch.reserve(config_.batch_size);
      for (std::size_t idx : samplers_[slot].next(config_.batch_size)) {
        batch.push_back(pool[idx]);
      }
      const std::uint64_t step_seed = rng_();
      StepResult r;
      try {
        r = run_subtask(task, lang, batch, step_seed);
      } catch (const GraphError& e) {
        throw TrainingError("iteration " + std::to_string(it) + ", " +
                            std::string(subtask_name(task)) + ": " + e.what());
      } catch (const TrainingError& e) {
        throw TrainingError("iteration " + std::to_string(it) + ", " +
                            e.what());
      }
      loss_sum += r.loss;
    }
    result.iteration_loss.push_back(loss_sum / 4.0);

    if (it % config_.eval_every == 0 || it == config_.switch_at) {
      const std::size_t first = result.curve.size();
      for (model::Direction dir :
           {model::Direction{Lang::kSrc, Lang::kTrg},
            model::Direction{Lang::kTrg, Lang::kSrc}}) {
        result.curve.push_back(CurvePoint{it, dir, dev_bleu(dir)});
      }
      if (progress) {
        progress(it, std::span<const CurvePoint>(result.curve).subspan(first));
      }
    }
    if (it == config_.switch_at || it == config_.iterations) {
      result.checkpoints.push_back(Snapshot{it, model_.params(), rng_state()});
    }
  }
  return result;
}

}  // namespace unmt::train
