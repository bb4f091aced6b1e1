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

#include <random>

#include "doctest.h"
#include "unmt/kernels.hpp"
#include "unmt/training.hpp"

using namespace unmt;

namespace {

Tensor random(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Tensor t(r, c);
  for (double& v : t.values()) v = g(rng);
  return t;
}

}  // namespace

TEST_CASE("parallel gemm equals the serial reference") {
  std::mt19937_64 rng(1);
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {7, 5, 3}, {33, 64, 17}, {128, 96, 80}}) {
    const auto M = static_cast<std::size_t>(m), K = static_cast<std::size_t>(k),
               N = static_cast<std::size_t>(n);
    const Tensor a = random(M, K, rng), b = random(K, N, rng);
    Tensor c1(M, N), c2(M, N);
    kernels::serial::gemm_nn(a, b, c1);
    kernels::omp::gemm_nn(a, b, c2);
    CHECK(c1 == c2);

    const Tensor at = random(K, M, rng);
    Tensor d1(M, N), d2(M, N);
    kernels::serial::gemm_tn(at, b, d1);
    kernels::omp::gemm_tn(at, b, d2);
    CHECK(d1 == d2);

    const Tensor bt = random(N, K, rng);
    Tensor e1(M, N), e2(M, N);
    kernels::serial::gemm_nt(a, bt, e1);
    kernels::omp::gemm_nt(a, bt, e2);
    CHECK(e1 == e2);
    // Cross-check the transposed variants against a naive triple loop.
    for (std::size_t i = 0; i < M; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        double s = 0;
        for (std::size_t p = 0; p < K; ++p) s += a(i, p) * bt(j, p);
        CHECK(e1(i, j) == doctest::Approx(s).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("parallel batch gradient equals the serial reference") {
  model::ModelConfig c;
  c.src_vocab = c.trg_vocab = 10;
  c.emb_dim = c.hidden = c.attn_dim = 6;
  const model::Seq2Seq m(c, 2);
  std::vector<train::Example> batch;
  for (int i = 0; i < 6; ++i) {
    batch.push_back({model::Lang::kSrc, Sentence{4 + i % 5, 5, kEos},
                     model::Lang::kTrg, Sentence{6, 4 + i % 6, kEos}});
  }
  GradientBuffer g1(m.params()), g2(m.params());
  const double l1 = train::batch_gradient(m, batch, g1, kernels::Exec::Serial);
  const double l2 = train::batch_gradient(m, batch, g2, kernels::Exec::Parallel);
  CHECK(l1 == l2);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[i]);
}
