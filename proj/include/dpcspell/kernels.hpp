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

#pragma once

// Dense row-major kernels behind the autodiff engine. The default namespace
// holds the OpenMP-parallel versions; `reference` holds plain serial loops
// kept for testing and benchmarking against.

namespace dpcspell::kernels {

// C[m x n] = op(A) * op(B)  (or += when `accumulate`).
// op(A) is m x k: A is stored m x k, or k x m when `trans_a`.
// op(B) is k x n: B is stored k x n, or n x k when `trans_b`.
template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const T* a,
          const T* b, T* c, bool accumulate);

// Row-wise softmax over `cols`; rows whose entries are all -inf become zeros.
template <typename T>
void softmax_rows(const T* x, T* y, int rows, int cols);

// Row-wise layer normalization. `mean` and `rstd` receive per-row statistics
// (may be null).
template <typename T>
void layer_norm_rows(const T* x, const T* gamma, const T* beta, T* y, T* mean,
                     T* rstd, int rows, int cols, T eps);

// Caps the worker count used by the parallel kernels (<= 0 restores the
// OpenMP default). Reads DPCSPELL_THREADS on first use.
void set_max_threads(int threads);
int max_threads();

// Raises the allocator's mmap and trim thresholds so the large per-step
// activation buffers are recycled from the heap instead of being mapped and
// page-faulted afresh on every training step. Process-wide; no-op off glibc.
void keep_heap_warm();

namespace reference {

template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const T* a,
          const T* b, T* c, bool accumulate);

template <typename T>
void softmax_rows(const T* x, T* y, int rows, int cols);

template <typename T>
void layer_norm_rows(const T* x, const T* gamma, const T* beta, T* y, T* mean,
                     T* rstd, int rows, int cols, T eps);

}  // namespace reference

}  // namespace dpcspell::kernels
