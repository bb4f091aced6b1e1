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

#include <filesystem>

#include "doctest.h"
#include "unmt/experiment.hpp"

using namespace unmt;
using namespace unmt::experiment;
namespace fs = std::filesystem;

TEST_CASE("config parsing and overrides") {
  const auto c = parse_config(R"({"seed": 9, "model": {"hidden": 12},
                                  "train": {"iterations": 40, "lr": 0.5}})");
  CHECK(c.seed == 9);
  CHECK(c.hidden == 12);
  CHECK(c.iterations == 40);
  CHECK(c.effective_switch() == 20);
  CHECK(c.lr == 0.5);
  CHECK(c.attn_dim == ExperimentConfig{}.attn_dim);

  ExperimentConfig o = c;
  apply_override(o, "train.switch_at=10");
  apply_override(o, "data_dir=/tmp/some dir");
  apply_override(o, "train.parallel=false");
  CHECK(o.effective_switch() == 10);
  CHECK(o.data_dir == "/tmp/some dir");
  CHECK_FALSE(o.parallel);

  CHECK_THROWS_AS(parse_config(R"({"train": {"iterationz": 3}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"train": {"lr": "fast"}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"model": {"hidden": -4}})"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(o, "nonsense"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(o, "train.bogus=1"), std::invalid_argument);
}

TEST_CASE("canonical config JSON parses back to the same values") {
  ExperimentConfig c;
  c.seed = 123;
  c.lr = 0.7;
  c.tau1 = 0.65;
  const ExperimentConfig back = parse_config(config_json(c));
  CHECK(config_json(back) == config_json(c));
  CHECK(config_keys().size() == 19);
}

TEST_CASE("named sub-seeds differ") {
  CHECK(data_seed(1) != train_seed(1));
  CHECK(train_seed(1) != bootstrap_seed(1));
  CHECK(data_seed(1) != data_seed(2));
}

TEST_CASE("report formats") {
  eval::BleuReport r;
  r.bleu = 100.0;
  r.individual = {100, 100, 100, 100};
  r.precision = {1, 1, 1, 1};
  const std::string text = bleu_report_text(r, 0.0);
  CHECK(text.find("bleu = 100.00\n") == 0);
  const auto kv = parse_report(text);
  std::vector<std::string> keys;
  for (const auto& [k, v] : kv) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"bleu", "p1", "p2", "p3", "p4", "bp",
                                         "hyp_len", "ref_len", "bleu1", "bleu2",
                                         "bleu3", "bleu4", "scrambled_fraction"});
  eval::ScrambleSummary s;
  s.sentences.push_back({true, 1.0, 0.25, false});
  s.flagged_fraction = 1.0;
  CHECK(diagnosis_text(s) ==
        "index,flagged,p1,p2\n1,1,1.0000,0.2500\nscrambled_fraction = 1.0000\n");
}

TEST_CASE("generated data round-trips through the directory layout") {
  const auto spec = corpus::parse_spec(R"({
    "sentences": 60, "splits": [0.4, 0.4, 0.1, 0.1], "embedding_dim": 4,
    "categories": {"N": ["a", "b", "c"]}, "templates": ["x {N} {N}", "{N} y"]})");
  const auto dir = fs::temp_directory_path() / "unmt_experiment_test";
  fs::remove_all(dir);
  const auto files = generate_data(spec, 5, dir.string());
  CHECK(files.size() == 10);
  for (const auto& f : files) CHECK(fs::exists(f));
  const DataSet d = load_data(dir.string());
  CHECK(d.mono_src.size() == 24);
  CHECK(d.mono_trg.size() == 24);
  CHECK(d.dev.src.size() == 6);
  CHECK(d.test.trg.size() == 6);
  CHECK(d.embeddings.src.cols() == 4);

  // Same seed, same bytes.
  const auto dir2 = fs::temp_directory_path() / "unmt_experiment_test2";
  generate_data(spec, 5, dir2.string());
  for (const char* name : {DataFiles::kMonoSrc, DataFiles::kTestTrg, DataFiles::kEmbTrg}) {
    CHECK(read_lines((dir / name).string()) == read_lines((dir2 / name).string()));
  }
  fs::remove_all(dir);
  fs::remove_all(dir2);
}
