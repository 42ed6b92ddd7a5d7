// Copyright 2026 The dpcspell Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Parallel kernels against their serial reference versions.

#include <benchmark/benchmark.h>

#include <vector>

#include "dpcspell/kernels.hpp"
#include "dpcspell/rng.hpp"

namespace k = dpcspell::kernels;

namespace {

std::vector<float> filled(std::size_t n, std::uint64_t seed) {
  dpcspell::Rng rng(seed);
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.uniform01() * 2.0 - 1.0);
  return v;
}

// args: m, n, k, layout (0 NN, 1 NT, 2 TN)
template <bool Parallel>
void BM_gemm(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const int kk = static_cast<int>(state.range(2));
  const bool ta = state.range(3) == 2, tb = state.range(3) == 1;
  const auto a = filled(static_cast<std::size_t>(m) * kk, 1);
  const auto b = filled(static_cast<std::size_t>(kk) * n, 2);
  std::vector<float> c(static_cast<std::size_t>(m) * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::gemm(ta, tb, m, n, kk, a.data(), b.data(), c.data(), false);
    } else {
      k::reference::gemm(ta, tb, m, n, kk, a.data(), b.data(), c.data(), false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * m * n * kk);
}

template <bool Parallel>
void BM_softmax(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0)), cols = static_cast<int>(state.range(1));
  const auto x = filled(static_cast<std::size_t>(rows) * cols, 3);
  std::vector<float> y(x.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::softmax_rows(x.data(), y.data(), rows, cols);
    } else {
      k::reference::softmax_rows(x.data(), y.data(), rows, cols);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * rows * cols);
}

template <bool Parallel>
void BM_layer_norm(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0)), cols = static_cast<int>(state.range(1));
  const auto x = filled(static_cast<std::size_t>(rows) * cols, 4);
  const auto g = filled(cols, 5), b = filled(cols, 6);
  std::vector<float> y(x.size()), mean(rows), rstd(rows);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::layer_norm_rows(x.data(), g.data(), b.data(), y.data(), mean.data(), rstd.data(), rows, cols, 1e-5f);
    } else {
      k::reference::layer_norm_rows(x.data(), g.data(), b.data(), y.data(), mean.data(), rstd.data(), rows, cols,
                                    1e-5f);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * rows * cols);
}

// shapes of a batch-128 training step of the reduced model
void gemm_shapes(benchmark::internal::Benchmark* b) {
  for (int layout = 0; layout < 3; ++layout) {
    b->Args({2048, 64, 64, layout});
    b->Args({2048, 128, 64, layout});
    b->Args({2048, 40, 64, layout});
  }
}

void row_shapes(benchmark::internal::Benchmark* b) {
  b->Args({2048, 64});
  b->Args({8192, 16});
  b->Args({2048, 40});
}

}  // namespace

BENCHMARK(BM_gemm<true>)->Name("gemm/parallel")->Apply(gemm_shapes);
BENCHMARK(BM_gemm<false>)->Name("gemm/reference")->Apply(gemm_shapes);
BENCHMARK(BM_softmax<true>)->Name("softmax/parallel")->Apply(row_shapes);
BENCHMARK(BM_softmax<false>)->Name("softmax/reference")->Apply(row_shapes);
BENCHMARK(BM_layer_norm<true>)->Name("layer_norm/parallel")->Apply(row_shapes);
BENCHMARK(BM_layer_norm<false>)->Name("layer_norm/reference")->Apply(row_shapes);

BENCHMARK_MAIN();
