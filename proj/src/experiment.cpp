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

#include "unmt/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "unmt/seeds.hpp"

namespace unmt::experiment {

namespace fs = std::filesystem;
using json = nlohmann::json;
using model::Direction;
using model::Lang;

namespace {

using Setter = std::function<void(ExperimentConfig&, const json&)>;

template <class T>
Setter field(T ExperimentConfig::*member) {
  return [member](ExperimentConfig& c, const json& v) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw std::invalid_argument("expected true/false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) {
        throw std::invalid_argument("expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw std::invalid_argument("expected a number");
    } else {
      if (!v.is_string()) throw std::invalid_argument("expected a string");
    }
    c.*member = v.get<T>();
  };
}

// Ordered so config_keys() doubles as the documentation order.
const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"seed", field(&ExperimentConfig::seed)},
      {"data_dir", field(&ExperimentConfig::data_dir)},
      {"threads", field(&ExperimentConfig::threads)},
      {"model.hidden", field(&ExperimentConfig::hidden)},
      {"model.attn_dim", field(&ExperimentConfig::attn_dim)},
      {"model.init_scale", field(&ExperimentConfig::init_scale)},
      {"model.freeze_embeddings", field(&ExperimentConfig::freeze_embeddings)},
      {"train.iterations", field(&ExperimentConfig::iterations)},
      {"train.switch_at", field(&ExperimentConfig::switch_at)},
      {"train.eval_every", field(&ExperimentConfig::eval_every)},
      {"train.batch_size", field(&ExperimentConfig::batch_size)},
      {"train.lr", field(&ExperimentConfig::lr)},
      {"train.clip_norm", field(&ExperimentConfig::clip_norm)},
      {"train.max_len", field(&ExperimentConfig::max_len)},
      {"train.parallel", field(&ExperimentConfig::parallel)},
      {"eval.bootstrap_samples", field(&ExperimentConfig::bootstrap_samples)},
      {"eval.alpha", field(&ExperimentConfig::alpha)},
      {"eval.tau1", field(&ExperimentConfig::tau1)},
      {"eval.tau2", field(&ExperimentConfig::tau2)},
  };
  return table;
}

void set_key(ExperimentConfig& c, const std::string& key, const json& value) {
  for (const auto& [name, set] : setters()) {
    if (name == key) {
      try {
        set(c, value);
      } catch (const std::exception& e) {
        throw std::invalid_argument("config key '" + key + "': " + e.what());
      }
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

void flatten(const json& j, const std::string& prefix,
             std::vector<std::pair<std::string, json>>& out) {
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      flatten(v, key, out);
    } else {
      out.emplace_back(key, v);
    }
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << text;
}

void apply_threads(const ExperimentConfig& c) {
#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#else
  (void)c;
#endif
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

const Vocabulary& vocab_of(const DataSet& d, Lang l) {
  return l == Lang::kSrc ? d.vocabs.src : d.vocabs.trg;
}

constexpr std::array<Direction, 2> kDirections{Direction{Lang::kSrc, Lang::kTrg},
                                               Direction{Lang::kTrg, Lang::kSrc}};

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, set] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: expected an object");
  std::vector<std::pair<std::string, json>> flat;
  flatten(j, "", flat);
  ExperimentConfig c;
  for (const auto& [k, v] : flat) set_key(c, k, v);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  try {
    return parse_config(slurp(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override '" + assignment +
                                "' must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;  // bare strings such as paths
  set_key(config, key, value);
}

std::string config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["data_dir"] = c.data_dir;
  j["threads"] = c.threads;
  j["model"] = {{"hidden", c.hidden},
                {"attn_dim", c.attn_dim},
                {"init_scale", c.init_scale},
                {"freeze_embeddings", c.freeze_embeddings}};
  j["train"] = {{"iterations", c.iterations},
                {"switch_at", c.effective_switch()},
                {"eval_every", c.eval_every},
                {"batch_size", c.batch_size},
                {"lr", c.lr},
                {"clip_norm", c.clip_norm},
                {"max_len", c.max_len},
                {"parallel", c.parallel}};
  j["eval"] = {{"bootstrap_samples", c.bootstrap_samples},
               {"alpha", c.alpha},
               {"tau1", c.tau1},
               {"tau2", c.tau2}};
  return j.dump(2);
}

std::uint64_t data_seed(std::uint64_t seed) { return named_seed(seed, "data"); }
std::uint64_t train_seed(std::uint64_t seed) { return named_seed(seed, "train"); }
std::uint64_t bootstrap_seed(std::uint64_t seed) {
  return named_seed(seed, "bootstrap");
}

std::vector<std::string> generate_data(const corpus::LanguagePairSpec& spec,
                                       std::uint64_t seed,
                                       const std::string& out_dir) {
  std::mt19937_64 rng(data_seed(seed));
  const auto pairs = corpus::generate_corpus(spec, spec.sentences, rng);
  const auto vocabs = corpus::build_vocabularies(spec);
  const auto split = corpus::split_corpora(pairs, vocabs, spec.fractions, rng);
  const auto emb = corpus::oracle_embeddings(vocabs.src, vocabs.trg, spec.cipher,
                                             spec.embedding_dim,
                                             spec.embedding_noise, rng);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  auto at = [&](const char* name) { return (dir / name).string(); };
  vocabs.src.save(at(DataFiles::kVocabSrc));
  vocabs.trg.save(at(DataFiles::kVocabTrg));
  corpus::write_corpus(at(DataFiles::kMonoSrc), split.mono_src.sentences, vocabs.src);
  corpus::write_corpus(at(DataFiles::kMonoTrg), split.mono_trg.sentences, vocabs.trg);
  corpus::write_corpus(at(DataFiles::kDevSrc), split.dev.src, vocabs.src);
  corpus::write_corpus(at(DataFiles::kDevTrg), split.dev.trg, vocabs.trg);
  corpus::write_corpus(at(DataFiles::kTestSrc), split.test.src, vocabs.src);
  corpus::write_corpus(at(DataFiles::kTestTrg), split.test.trg, vocabs.trg);
  corpus::save_embeddings(at(DataFiles::kEmbSrc), vocabs.src, emb.src);
  corpus::save_embeddings(at(DataFiles::kEmbTrg), vocabs.trg, emb.trg);
  return {at(DataFiles::kVocabSrc), at(DataFiles::kVocabTrg),
          at(DataFiles::kMonoSrc),  at(DataFiles::kMonoTrg),
          at(DataFiles::kDevSrc),   at(DataFiles::kDevTrg),
          at(DataFiles::kTestSrc),  at(DataFiles::kTestTrg),
          at(DataFiles::kEmbSrc),   at(DataFiles::kEmbTrg)};
}

DataSet load_data(const std::string& dir) {
  const fs::path d(dir);
  auto at = [&](const char* name) { return (d / name).string(); };
  DataSet out{{Vocabulary::load(at(DataFiles::kVocabSrc), "src"),
               Vocabulary::load(at(DataFiles::kVocabTrg), "trg")},
              {}, {}, {}, {}, {}};
  out.mono_src = corpus::read_corpus(at(DataFiles::kMonoSrc), out.vocabs.src);
  out.mono_trg = corpus::read_corpus(at(DataFiles::kMonoTrg), out.vocabs.trg);
  out.dev.src = corpus::read_corpus(at(DataFiles::kDevSrc), out.vocabs.src);
  out.dev.trg = corpus::read_corpus(at(DataFiles::kDevTrg), out.vocabs.trg);
  out.test.src = corpus::read_corpus(at(DataFiles::kTestSrc), out.vocabs.src);
  out.test.trg = corpus::read_corpus(at(DataFiles::kTestTrg), out.vocabs.trg);
  out.embeddings.src = corpus::load_embeddings(at(DataFiles::kEmbSrc), out.vocabs.src);
  out.embeddings.trg = corpus::load_embeddings(at(DataFiles::kEmbTrg), out.vocabs.trg);
  if (out.embeddings.src.cols() != out.embeddings.trg.cols()) {
    throw std::runtime_error(dir + ": embedding dimensions differ");
  }
  if (out.dev.src.size() != out.dev.trg.size() ||
      out.test.src.size() != out.test.trg.size()) {
    throw std::runtime_error(dir + ": dev/test sides have different lengths");
  }
  return out;
}

train::TrainConfig make_train_config(const ExperimentConfig& c,
                                     const DataSet& data, train::Mode mode) {
  train::TrainConfig t;
  t.iterations = c.iterations;
  t.switch_at = c.effective_switch();
  t.eval_every = c.eval_every;
  t.batch_size = c.batch_size;
  t.lr = c.lr;
  t.clip_norm = c.clip_norm;
  t.max_len = c.max_len;
  t.seed = train_seed(c.seed);
  t.mode = mode;
  t.exec = c.exec();
  t.model.src_vocab = data.vocabs.src.size();
  t.model.trg_vocab = data.vocabs.trg.size();
  t.model.emb_dim = data.embeddings.src.cols();
  t.model.hidden = c.hidden;
  t.model.attn_dim = c.attn_dim;
  t.model.freeze_embeddings = c.freeze_embeddings;
  t.model.init_scale = c.init_scale;
  t.validate();
  return t;
}

Checkpoint make_checkpoint(const ExperimentConfig& config, const DataSet& data,
                           const train::Snapshot& snap) {
  Checkpoint ck;
  ck.config = make_train_config(config, data, train::Mode::kBaseline).model;
  ck.iteration = snap.iteration;
  const auto src = data.vocabs.src.tokens();
  const auto trg = data.vocabs.trg.tokens();
  ck.src_vocab.assign(src.begin(), src.end());
  ck.trg_vocab.assign(trg.begin(), trg.end());
  ck.config_echo = config_json(config);
  ck.params = snap.params;
  ck.rng_state = snap.rng_state;
  return ck;
}

TrainOutputs train_and_save(const ExperimentConfig& config, const DataSet& data,
                            train::Mode mode, const std::string& out_dir,
                            const train::Trainer::Progress& progress) {
  apply_threads(config);
  const train::TrainConfig tc = make_train_config(config, data, mode);
  train::Trainer trainer(tc, train::TrainingData{data.mono_src, data.mono_trg, data.dev},
                         data.embeddings);
  TrainOutputs out;
  out.result = trainer.train(progress);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  for (const auto& snap : out.result.checkpoints) {
    const auto path = dir / ("ckpt_" + std::to_string(snap.iteration));
    save_checkpoint(path.string(), make_checkpoint(config, data, snap));
    out.files.push_back(path.string());
  }
  const auto curve = dir / "curve.csv";
  write_text(curve, train::curve_csv(out.result.curve));
  out.files.push_back(curve.string());
  return out;
}

DirectionEval evaluate_direction(const model::Seq2Seq& m,
                                 const corpus::ParallelCorpus& test,
                                 Direction dir, const ExperimentConfig& config) {
  const auto& src = dir.from == Lang::kSrc ? test.src : test.trg;
  const auto& ref = dir.from == Lang::kSrc ? test.trg : test.src;
  DirectionEval e;
  e.direction = dir;
  for (auto& t : train::translate_all(m, src, dir, config.max_len, config.exec())) {
    e.hyps.push_back(std::move(t.tokens));
    e.attention.push_back(std::move(t.attention));
  }
  e.bleu = eval::corpus_bleu(e.hyps, ref);
  e.scrambled_fraction =
      eval::scramble_corpus(e.hyps, ref, config.tau1, config.tau2).flagged_fraction;
  e.mean_entropy = eval::pooled_row_entropy(e.attention);
  return e;
}

std::string bleu_report_text(const eval::BleuReport& r,
                             double scrambled_fraction) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) {
    out += k + " = " + v + "\n";
  };
  line("bleu", fmt("%.2f", r.bleu));
  for (std::size_t n = 0; n < eval::kMaxOrder; ++n) {
    line("p" + std::to_string(n + 1), fmt("%.4f", r.precision[n]));
  }
  line("bp", fmt("%.4f", r.brevity_penalty));
  line("hyp_len", std::to_string(r.hyp_len));
  line("ref_len", std::to_string(r.ref_len));
  for (std::size_t n = 0; n < eval::kMaxOrder; ++n) {
    line("bleu" + std::to_string(n + 1), fmt("%.2f", r.individual[n]));
  }
  line("scrambled_fraction", fmt("%.4f", scrambled_fraction));
  return out;
}

std::string bootstrap_report_text(const eval::BootstrapResult& r) {
  std::string out;
  out += "samples = " + std::to_string(r.samples) + "\n";
  out += "bleu_a = " + fmt("%.2f", r.bleu_a) + "\n";
  out += "bleu_b = " + fmt("%.2f", r.bleu_b) + "\n";
  out += "wins_b = " + std::to_string(r.wins_b) + "\n";
  out += "p_value = " + fmt("%.4f", r.p_value) + "\n";
  out += "alpha = " + fmt("%.4f", r.alpha) + "\n";
  out += std::string("significant = ") + (r.significant ? "true" : "false") + "\n";
  return out;
}

std::string diagnosis_text(const eval::ScrambleSummary& s) {
  std::string out = "index,flagged,p1,p2\n";
  char buf[96];
  for (std::size_t i = 0; i < s.sentences.size(); ++i) {
    const auto& r = s.sentences[i];
    std::snprintf(buf, sizeof buf, "%zu,%d,%.4f,%.4f\n", i + 1,
                  r.flagged ? 1 : 0, r.p1, r.p2);
    out += buf;
  }
  out += "scrambled_fraction = " + fmt("%.4f", s.flagged_fraction) + "\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_report(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  return out;
}

Comparison run_comparison(const ExperimentConfig& config, const DataSet& data,
                          const std::string& out_dir,
                          const train::Trainer::Progress& progress) {
  const fs::path root(out_dir);
  Comparison cmp;
  const model::ModelConfig mc =
      make_train_config(config, data, train::Mode::kBaseline).model;
  std::array<train::Trainer::Result, 2> results;
  const std::array<train::Mode, 2> modes{train::Mode::kBaseline, train::Mode::kRetrain};
  for (std::size_t k = 0; k < 2; ++k) {
    const fs::path dir = root / std::string(train::mode_name(modes[k]));
    results[k] = train_and_save(config, data, modes[k], dir.string(), progress).result;
    const model::Seq2Seq final_model(mc, results[k].checkpoints.back().params);
    auto& evals = k == 0 ? cmp.baseline : cmp.retrain;
    for (std::size_t d = 0; d < 2; ++d) {
      evals[d] = evaluate_direction(final_model, data.test, kDirections[d], config);
      const Vocabulary& v = vocab_of(data, kDirections[d].to);
      std::vector<std::string> lines;
      for (const auto& h : evals[d].hyps) lines.push_back(detokenize(v.decode(h)));
      const std::string stem = "test." + model::direction_name(kDirections[d]);
      write_lines((dir / (stem + ".hyp")).string(), lines);
      write_text(dir / (stem + ".report"),
                 bleu_report_text(evals[d].bleu, evals[d].scrambled_fraction));
    }
  }
  cmp.phase1_identical =
      results[0].checkpoints.front().params == results[1].checkpoints.front().params &&
      results[0].checkpoints.front().iteration == config.effective_switch();

  for (std::size_t d = 0; d < 2; ++d) {
    const auto& ref = kDirections[d].from == Lang::kSrc ? data.test.trg : data.test.src;
    cmp.significance[d] = eval::paired_bootstrap(
        cmp.baseline[d].hyps, cmp.retrain[d].hyps, ref, config.bootstrap_samples,
        derive_seed(bootstrap_seed(config.seed), d), config.alpha, config.exec());
    for (const auto& p : results[1].curve) {
      if (p.direction.from != kDirections[d].from) continue;
      if (p.iteration == config.effective_switch()) cmp.retrain_dev_at_m[d] = p.bleu;
      if (p.iteration == config.iterations) cmp.retrain_dev_at_n[d] = p.bleu;
    }
  }

  std::string r;
  auto line = [&](const std::string& k, const std::string& v) {
    r += k + " = " + v + "\n";
  };
  line("iterations", std::to_string(config.iterations));
  line("switch_at", std::to_string(config.effective_switch()));
  line("phase1_identical", cmp.phase1_identical ? "true" : "false");
  for (std::size_t d = 0; d < 2; ++d) {
    const std::string p = model::direction_name(kDirections[d]) + ".";
    const auto& b = cmp.baseline[d];
    const auto& t = cmp.retrain[d];
    line(p + "baseline.bleu", fmt("%.2f", b.bleu.bleu));
    line(p + "retrain.bleu", fmt("%.2f", t.bleu.bleu));
    line(p + "delta_bleu", fmt("%.2f", t.bleu.bleu - b.bleu.bleu));
    const auto delta = eval::delta_table(b.bleu.individual, t.bleu.individual);
    for (std::size_t n = 0; n < eval::kMaxOrder; ++n) {
      const std::string id = std::to_string(n + 1);
      line(p + "baseline.bleu" + id, fmt("%.2f", b.bleu.individual[n]));
      line(p + "retrain.bleu" + id, fmt("%.2f", t.bleu.individual[n]));
      line(p + "delta_pct.bleu" + id, delta[n] ? fmt("%.2f", *delta[n]) : "undefined");
    }
    line(p + "baseline.scrambled_fraction", fmt("%.4f", b.scrambled_fraction));
    line(p + "retrain.scrambled_fraction", fmt("%.4f", t.scrambled_fraction));
    line(p + "baseline.attention_entropy", fmt("%.4f", b.mean_entropy));
    line(p + "retrain.attention_entropy", fmt("%.4f", t.mean_entropy));
    line(p + "retrain.dev_bleu_at_m", fmt("%.2f", cmp.retrain_dev_at_m[d]));
    line(p + "retrain.dev_bleu_at_n", fmt("%.2f", cmp.retrain_dev_at_n[d]));
    line(p + "bootstrap.p_value", fmt("%.4f", cmp.significance[d].p_value));
    line(p + "bootstrap.significant", cmp.significance[d].significant ? "true" : "false");
  }
  cmp.report = r;
  write_text(root / "comparison.txt", r);
  return cmp;
}

}  // namespace unmt::experiment
