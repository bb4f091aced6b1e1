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
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "unmt/eval.hpp"

namespace unmt::eval {

ScrambleResult scramble_diagnose(std::span<const int> hyp,
                                 std::span<const int> ref, double tau1,
                                 double tau2) {
  if (!(tau1 > tau2)) {
    throw std::invalid_argument("scramble_diagnose: tau1 must exceed tau2");
  }
  ScrambleResult r;
  if (hyp.empty()) {
    r.degenerate = true;
    return r;
  }
  const BleuStats s = sentence_stats(hyp, ref);
  r.p1 = static_cast<double>(s.matches[0] + 1) /
         static_cast<double>(s.totals[0] + 1);
  r.p2 = static_cast<double>(s.matches[1] + 1) /
         static_cast<double>(s.totals[1] + 1);
  r.flagged = r.p1 >= tau1 && r.p2 <= tau2;
  return r;
}

ScrambleSummary scramble_corpus(std::span<const Sentence> hyps,
                                std::span<const Sentence> refs, double tau1,
                                double tau2) {
  if (hyps.size() != refs.size() || hyps.empty()) {
    throw std::invalid_argument("scramble_corpus: need equal, non-empty lists");
  }
  ScrambleSummary out;
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    out.sentences.push_back(scramble_diagnose(hyps[i], refs[i], tau1, tau2));
    flagged += out.sentences.back().flagged ? 1 : 0;
  }
  out.flagged_fraction =
      static_cast<double>(flagged) / static_cast<double>(hyps.size());
  return out;
}

double row_entropy(std::span<const double> row) {
  double h = 0.0;
  for (double p : row) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double mean_row_entropy(const Tensor& attention) {
  if (attention.rows() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < attention.rows(); ++i) {
    sum += row_entropy(attention.row(i));
  }
  return sum / static_cast<double>(attention.rows());
}

double pooled_row_entropy(std::span<const Tensor> attentions) {
  double sum = 0.0;
  std::size_t rows = 0;
  for (const auto& a : attentions) {
    for (std::size_t i = 0; i < a.rows(); ++i) sum += row_entropy(a.row(i));
    rows += a.rows();
  }
  return rows ? sum / static_cast<double>(rows) : 0.0;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

std::string heatmap_csv(const Tensor& attention,
                        std::span<const std::string> src_tokens,
                        std::span<const std::string> tgt_tokens) {
  if (attention.rows() != tgt_tokens.size() ||
      attention.cols() != src_tokens.size()) {
    throw std::invalid_argument(
        "heatmap: matrix " + attention.shape_string() + " vs " +
        std::to_string(tgt_tokens.size()) + " target and " +
        std::to_string(src_tokens.size()) + " source tokens");
  }
  std::string out;
  for (const auto& s : src_tokens) {
    out.push_back(',');
    out += csv_field(s);
  }
  out.push_back('\n');
  char buf[32];
  for (std::size_t i = 0; i < attention.rows(); ++i) {
    out += csv_field(tgt_tokens[i]);
    for (double v : attention.row(i)) {
      std::snprintf(buf, sizeof buf, ",%.6f", v);
      out += buf;
    }
    out.push_back('\n');
  }
  return out;
}

Heatmap parse_heatmap_csv(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  if (lines.empty()) throw std::invalid_argument("heatmap CSV is empty");
  Heatmap h;
  auto header = split_csv_line(lines[0]);
  h.src_tokens.assign(header.begin() + 1, header.end());
  h.weights = Tensor(lines.size() - 1, h.src_tokens.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != h.src_tokens.size() + 1) {
      throw std::invalid_argument("heatmap CSV line " + std::to_string(i + 1) +
                                  " has " + std::to_string(fields.size()) +
                                  " fields");
    }
    h.tgt_tokens.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      h.weights(i - 1, j - 1) = std::stod(fields[j]);
    }
  }
  return h;
}

double export_heatmap(const Tensor& attention,
                      std::span<const std::string> src_tokens,
                      std::span<const std::string> tgt_tokens,
                      const std::string& path) {
  const std::string csv = heatmap_csv(attention, src_tokens, tgt_tokens);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << csv;
  if (!out) throw std::runtime_error(path + ": write error");
  return mean_row_entropy(attention);
}

}  // namespace unmt::eval
