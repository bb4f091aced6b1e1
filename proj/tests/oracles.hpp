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

// Test-side reference implementations. They share no code with the library
// and favor directness over speed.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

/// 0.99 quantiles of chi-squared with 1..15 degrees of freedom
/// (scipy.stats.chi2.ppf).
inline double chi2_quantile_99(std::size_t dof) {
  static const double q[] = {6.6348966010212145, 9.21034037197618,
                             11.344866730144373, 13.276704135987622,
                             15.08627246938899,  16.811893829770927,
                             18.475306906582357, 20.090235029663233,
                             21.665994333461924, 23.209251158954356,
                             24.724970311318277, 26.216967305535853,
                             27.68824961045705,  29.141237740672796,
                             30.57791416689249};
  if (dof < 1 || dof > 15) throw std::out_of_range("chi2 table");
  return q[dof - 1];
}

using Words = std::vector<std::string>;

inline Words split(const std::string& s) {
  std::istringstream in(s);
  Words w;
  for (std::string t; in >> t;) w.push_back(t);
  return w;
}

inline std::map<Words, int> ngram_counts(const Words& w, std::size_t n) {
  std::map<Words, int> c;
  for (std::size_t i = 0; i + n <= w.size(); ++i) {
    c[Words(w.begin() + static_cast<long>(i),
            w.begin() + static_cast<long>(i + n))]++;
  }
  return c;
}

struct Counts {
  double hyp = 0, ref = 0;
  double m[4] = {0, 0, 0, 0};
  double t[4] = {0, 0, 0, 0};
};

inline Counts count(const std::vector<Words>& hyps,
                    const std::vector<Words>& refs) {
  Counts c;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    c.hyp += static_cast<double>(hyps[s].size());
    c.ref += static_cast<double>(refs[s].size());
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto h = ngram_counts(hyps[s], n);
      const auto r = ngram_counts(refs[s], n);
      for (const auto& [g, k] : h) {
        c.t[n - 1] += k;
        const auto it = r.find(g);
        if (it != r.end()) c.m[n - 1] += std::min(k, it->second);
      }
    }
  }
  return c;
}

inline double brevity(const Counts& c) {
  if (c.hyp == 0) return 0.0;
  return c.hyp >= c.ref ? 1.0 : std::exp(1.0 - c.ref / c.hyp);
}

/// Cumulative BLEU-4 in [0, 100], no smoothing.
inline double bleu(const std::vector<Words>& hyps,
                   const std::vector<Words>& refs) {
  const Counts c = count(hyps, refs);
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    if (c.m[n] == 0 || c.t[n] == 0) return 0.0;
    log_sum += std::log(c.m[n] / c.t[n]);
  }
  return 100.0 * brevity(c) * std::exp(log_sum / 4.0);
}

/// Individual n-gram BLEU-n in [0, 100].
inline double bleu_n(const std::vector<Words>& hyps,
                     const std::vector<Words>& refs, std::size_t n) {
  const Counts c = count(hyps, refs);
  if (c.t[n - 1] == 0) return 0.0;
  return 100.0 * brevity(c) * c.m[n - 1] / c.t[n - 1];
}

/// Exhaustive paired bootstrap: every ordered n-tuple of sentence indices.
/// Returns the share of tuples where B does not beat A.
inline double exhaustive_p(const std::vector<Words>& a,
                           const std::vector<Words>& b,
                           const std::vector<Words>& refs) {
  const std::size_t n = refs.size();
  std::vector<std::size_t> idx(n, 0);
  double total = 0, not_better = 0;
  while (true) {
    std::vector<Words> ha, hb, rr;
    for (std::size_t i : idx) {
      ha.push_back(a[i]);
      hb.push_back(b[i]);
      rr.push_back(refs[i]);
    }
    total += 1;
    if (!(bleu(hb, rr) > bleu(ha, rr))) not_better += 1;
    std::size_t k = 0;
    while (k < n && ++idx[k] == n) idx[k++] = 0;
    if (k == n) break;
  }
  return not_better / total;
}

}  // namespace oracle
