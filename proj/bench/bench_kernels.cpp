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

// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "unmt/eval.hpp"
#include "unmt/kernels.hpp"
#include "unmt/training.hpp"

using namespace unmt;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Tensor t(r, c);
  for (double& v : t.values()) v = g(rng);
  return t;
}

template <void (*Gemm)(const Tensor&, const Tensor&, Tensor&)>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor(n, n, 1), b = random_tensor(n, n, 2);
  Tensor c(n, n);
  for (auto _ : state) {
    Gemm(a, b, c);
    benchmark::DoNotOptimize(c.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

BENCHMARK(BM_Gemm<kernels::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_Gemm<kernels::omp::gemm_nn>)->Name("gemm_nn/omp")->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_Gemm<kernels::serial::gemm_tn>)->Name("gemm_tn/serial")->Arg(128);
BENCHMARK(BM_Gemm<kernels::omp::gemm_tn>)->Name("gemm_tn/omp")->Arg(128);
BENCHMARK(BM_Gemm<kernels::serial::gemm_nt>)->Name("gemm_nt/serial")->Arg(128);
BENCHMARK(BM_Gemm<kernels::omp::gemm_nt>)->Name("gemm_nt/omp")->Arg(128);

void BM_BatchGradient(benchmark::State& state) {
  const auto exec = static_cast<kernels::Exec>(state.range(0));
  model::ModelConfig c;
  c.src_vocab = c.trg_vocab = 60;
  c.emb_dim = c.hidden = c.attn_dim = 16;
  const model::Seq2Seq m(c, 1);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> tok(4, 59);
  std::vector<train::Example> batch;
  for (int i = 0; i < 8; ++i) {
    Sentence s, t;
    for (int k = 0; k < 8; ++k) s.push_back(tok(rng));
    for (int k = 0; k < 8; ++k) t.push_back(tok(rng));
    s.push_back(kEos);
    t.push_back(kEos);
    batch.push_back({model::Lang::kSrc, s, model::Lang::kTrg, t});
  }
  GradientBuffer g(m.params());
  for (auto _ : state) {
    benchmark::DoNotOptimize(train::batch_gradient(m, batch, g, exec));
  }
}
BENCHMARK(BM_BatchGradient)
    ->ArgName("parallel")
    ->Arg(static_cast<int>(kernels::Exec::Serial))
    ->Arg(static_cast<int>(kernels::Exec::Parallel));

void BM_Bootstrap(benchmark::State& state) {
  const auto exec = static_cast<kernels::Exec>(state.range(0));
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> tok(4, 40);
  std::vector<Sentence> a, b, r;
  for (int i = 0; i < 500; ++i) {
    Sentence x, y, z;
    for (int k = 0; k < 10; ++k) {
      z.push_back(tok(rng));
      x.push_back(k % 3 ? z.back() : tok(rng));
      y.push_back(k % 5 ? z.back() : tok(rng));
    }
    a.push_back(x);
    b.push_back(y);
    r.push_back(z);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval::paired_bootstrap(a, b, r, 200, 1, 0.05, exec));
  }
}
BENCHMARK(BM_Bootstrap)
    ->ArgName("parallel")
    ->Arg(static_cast<int>(kernels::Exec::Serial))
    ->Arg(static_cast<int>(kernels::Exec::Parallel));

}  // namespace

BENCHMARK_MAIN();
