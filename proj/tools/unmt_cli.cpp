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

// unmt: command-line front end for the denoising UNMT lab.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "unmt/checkpoint.hpp"
#include "unmt/corpus.hpp"
#include "unmt/eval.hpp"
#include "unmt/experiment.hpp"
#include "unmt/model.hpp"

namespace fs = std::filesystem;
using namespace unmt;

namespace {

void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << text;
}

struct Loaded {
  Checkpoint ckpt;
  model::Seq2Seq model;
  std::size_t max_len;
};

Loaded load_model(const std::string& path, std::optional<std::size_t> max_len) {
  Checkpoint ck = load_checkpoint(path);
  std::size_t len = 40;
  if (max_len) {
    len = *max_len;
  } else if (!ck.config_echo.empty()) {
    len = experiment::parse_config(ck.config_echo).max_len;
  }
  model::Seq2Seq m(ck.config, ck.params);
  return {std::move(ck), std::move(m), len};
}

// Heatmap axes: the encoder sees the sentence plus </s>; the decoder rows are
// the emitted words plus </s> when decoding stopped on its own.
void heatmap_axes(const std::vector<std::string>& src_words,
                  const model::Translation& t, const Vocabulary& out_vocab,
                  std::vector<std::string>& src_axis,
                  std::vector<std::string>& tgt_axis) {
  src_axis = src_words;
  src_axis.push_back("</s>");
  tgt_axis = out_vocab.decode(t.tokens);
  if (!t.hit_max_len) tgt_axis.push_back("</s>");
}

std::vector<Sentence> read_tokenized(const std::string& path,
                                     eval::TokenInterner& in) {
  return in.intern_lines(read_lines(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Denoising UNMT laboratory"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic language pair");
  std::string spec_path, gen_out;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--spec", spec_path, "Language-pair spec (JSON)")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Global seed (default: the seed in the language-pair file)");

  // train
  auto* tr = app.add_subcommand("train", "Train one model and write checkpoints");
  std::string cfg_path, mode_name, train_out;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> tr_seed;
  std::optional<std::size_t> tr_iterations, tr_switch;
  std::optional<std::string> tr_data;
  tr->add_option("--config", cfg_path, "Experiment config (JSON)")->required();
  tr->add_option("--mode", mode_name, "baseline or retrain")
      ->required()
      ->check(CLI::IsMember({"baseline", "retrain"}));
  tr->add_option("--out", train_out, "Output directory")->required();
  tr->add_option("--set", overrides, "Override a config key: section.key=value");
  tr->add_option("--seed", tr_seed, "Override seed");
  tr->add_option("--iterations", tr_iterations, "Override train.iterations");
  tr->add_option("--switch-at", tr_switch, "Override train.switch_at");
  tr->add_option("--data-dir", tr_data, "Override data_dir");
  bool quiet = false;
  tr->add_flag("--quiet", quiet, "No progress lines");

  // translate
  auto* tl = app.add_subcommand("translate", "Greedy-translate a file");
  std::string tl_ckpt, tl_input, tl_dir, tl_out, tl_attn;
  std::optional<std::size_t> tl_max;
  tl->add_option("--ckpt", tl_ckpt, "Checkpoint")->required();
  tl->add_option("--input", tl_input, "Tokenized input, one sentence per line")->required();
  tl->add_option("--direction", tl_dir, "src-trg or trg-src")->required();
  tl->add_option("--out", tl_out, "Hypothesis file")->required();
  tl->add_option("--attn-dir", tl_attn, "Write one heatmap CSV per sentence here");
  tl->add_option("--max-len", tl_max, "Decoding limit (default: from checkpoint)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Corpus BLEU report");
  std::string ev_hyp, ev_ref, ev_out;
  double tau1 = 0.6, tau2 = 0.3;
  ev->add_option("--hyp", ev_hyp, "Hypotheses")->required();
  ev->add_option("--ref", ev_ref, "References")->required();
  ev->add_option("--out", ev_out, "Report file ('-' for stdout)")->required();
  ev->add_option("--tau1", tau1, "Scramble unigram threshold");
  ev->add_option("--tau2", tau2, "Scramble bigram threshold");

  // significance
  auto* sg = app.add_subcommand("significance", "Paired bootstrap resampling");
  std::string sg_a, sg_b, sg_ref, sg_out;
  std::size_t samples = 1000;
  std::uint64_t sg_seed = 1;
  double alpha = 0.05;
  sg->add_option("--hyp-a", sg_a, "System A hypotheses")->required();
  sg->add_option("--hyp-b", sg_b, "System B hypotheses")->required();
  sg->add_option("--ref", sg_ref, "References")->required();
  sg->add_option("--samples", samples, "Resamples");
  sg->add_option("--seed", sg_seed, "Bootstrap seed");
  sg->add_option("--alpha", alpha, "Significance level");
  sg->add_option("--out", sg_out, "Report file (default stdout)");

  // diagnose
  auto* dg = app.add_subcommand("diagnose", "Per-sentence scramble flags");
  std::string dg_hyp, dg_ref, dg_out;
  dg->add_option("--hyp", dg_hyp, "Hypotheses")->required();
  dg->add_option("--ref", dg_ref, "References")->required();
  dg->add_option("--out", dg_out, "Output file (default stdout)");
  dg->add_option("--tau1", tau1, "Scramble unigram threshold");
  dg->add_option("--tau2", tau2, "Scramble bigram threshold");

  // heatmap
  auto* hm = app.add_subcommand("heatmap", "Attention heatmap of one sentence");
  std::string hm_ckpt, hm_sentence, hm_dir, hm_out;
  std::optional<std::size_t> hm_max;
  hm->add_option("--ckpt", hm_ckpt, "Checkpoint")->required();
  hm->add_option("--sentence", hm_sentence, "Tokenized sentence")->required();
  hm->add_option("--direction", hm_dir, "src-trg or trg-src")->required();
  hm->add_option("--out", hm_out, "CSV path")->required();
  hm->add_option("--max-len", hm_max, "Decoding limit (default: from checkpoint)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) {
      const auto spec = corpus::load_spec(spec_path);
      const auto files =
          experiment::generate_data(spec, gen_seed.value_or(spec.seed), gen_out);
      for (const auto& f : files) std::cout << f << "\n";
    } else if (tr->parsed()) {
      auto config = experiment::load_config(cfg_path);
      if (tr_seed) config.seed = *tr_seed;
      if (tr_iterations) config.iterations = *tr_iterations;
      if (tr_switch) config.switch_at = *tr_switch;
      if (tr_data) config.data_dir = *tr_data;
      for (const auto& o : overrides) experiment::apply_override(config, o);
      const auto data = experiment::load_data(config.data_dir);
      train::Trainer::Progress progress;
      if (!quiet) {
        progress = [](std::size_t it, std::span<const train::CurvePoint> pts) {
          std::fprintf(stderr, "iteration %zu", it);
          for (const auto& p : pts) {
            std::fprintf(stderr, "  %s %.2f", model::direction_name(p.direction).c_str(),
                         p.bleu);
          }
          std::fprintf(stderr, "\n");
        };
      }
      const auto out = experiment::train_and_save(
          config, data, train::parse_mode(mode_name), train_out, progress);
      for (const auto& f : out.files) std::cout << f << "\n";
    } else if (tl->parsed()) {
      const auto dir = model::parse_direction(tl_dir);
      const Loaded l = load_model(tl_ckpt, tl_max);
      const Vocabulary in_vocab = checkpoint_vocab(l.ckpt, dir.from);
      const Vocabulary out_vocab = checkpoint_vocab(l.ckpt, dir.to);
      const auto lines = read_lines(tl_input);
      std::vector<std::vector<std::string>> words;
      std::vector<Sentence> src;
      for (const auto& line : lines) {
        words.push_back(tokenize(line));
        if (words.back().empty()) {
          throw std::invalid_argument(tl_input + ": empty line " +
                                      std::to_string(src.size() + 1));
        }
        src.push_back(in_vocab.encode(words.back()));
      }
      const auto out =
          train::translate_all(l.model, src, dir, l.max_len, kernels::Exec::Parallel);
      std::vector<std::string> hyps;
      for (const auto& t : out) hyps.push_back(detokenize(out_vocab.decode(t.tokens)));
      write_lines(tl_out, hyps);
      if (!tl_attn.empty()) {
        fs::create_directories(tl_attn);
        std::vector<Tensor> attn;
        for (std::size_t i = 0; i < out.size(); ++i) {
          std::vector<std::string> sa, ta;
          heatmap_axes(words[i], out[i], out_vocab, sa, ta);
          char name[32];
          std::snprintf(name, sizeof name, "sent_%05zu.csv", i + 1);
          eval::export_heatmap(out[i].attention, sa, ta,
                               (fs::path(tl_attn) / name).string());
          attn.push_back(out[i].attention);
        }
        std::printf("mean_row_entropy = %.4f\n", eval::pooled_row_entropy(attn));
      }
    } else if (ev->parsed()) {
      eval::TokenInterner in;
      const auto hyps = read_tokenized(ev_hyp, in);
      const auto refs = read_tokenized(ev_ref, in);
      const auto report = eval::corpus_bleu(hyps, refs);
      const double frac = eval::scramble_corpus(hyps, refs, tau1, tau2).flagged_fraction;
      write_file(ev_out, experiment::bleu_report_text(report, frac));
    } else if (sg->parsed()) {
      eval::TokenInterner in;
      const auto a = read_tokenized(sg_a, in);
      const auto b = read_tokenized(sg_b, in);
      const auto r = read_tokenized(sg_ref, in);
      const auto res = eval::paired_bootstrap(a, b, r, samples, sg_seed, alpha,
                                              kernels::Exec::Parallel);
      write_file(sg_out, experiment::bootstrap_report_text(res));
    } else if (dg->parsed()) {
      eval::TokenInterner in;
      const auto hyps = read_tokenized(dg_hyp, in);
      const auto refs = read_tokenized(dg_ref, in);
      write_file(dg_out,
                 experiment::diagnosis_text(eval::scramble_corpus(hyps, refs, tau1, tau2)));
    } else if (hm->parsed()) {
      const auto dir = model::parse_direction(hm_dir);
      const Loaded l = load_model(hm_ckpt, hm_max);
      const auto words = tokenize(hm_sentence);
      if (words.empty()) throw std::invalid_argument("--sentence is empty");
      Sentence src = checkpoint_vocab(l.ckpt, dir.from).encode(words);
      src.push_back(kEos);
      const auto t = l.model.translate(src, dir, l.max_len);
      std::vector<std::string> sa, ta;
      heatmap_axes(words, t, checkpoint_vocab(l.ckpt, dir.to), sa, ta);
      const double h = eval::export_heatmap(t.attention, sa, ta, hm_out);
      std::printf("translation = %s\nmean_row_entropy = %.4f\n",
                  detokenize(checkpoint_vocab(l.ckpt, dir.to).decode(t.tokens)).c_str(), h);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
