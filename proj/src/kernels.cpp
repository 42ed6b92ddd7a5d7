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

#include "dpcspell/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif
#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace dpcspell::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr long kParallelWork = 1L << 16;

std::once_flag g_env_once;

void apply_env_threads() {
  std::call_once(g_env_once, [] {
    if (const char* env = std::getenv("DPCSPELL_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) set_max_threads(n);
    }
  });
}

bool go_parallel(long work) {
  apply_env_threads();
#ifdef _OPENMP
  return work >= kParallelWork && omp_get_max_threads() > 1 &&
         !omp_in_parallel();
#else
  (void)work;
  return false;
#endif
}

template <typename T>
void transpose_into(const T* src, int rows, int cols, T* dst) {
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
  }
}

// Register tile: kMR rows of C by kNR columns (two 512-bit vectors) stay in
// accumulators for the whole k loop. A is addressed as a[r * ars + p * aps]
// so the same code serves both layouts of A.
constexpr int kMR = 6;
template <typename T>
constexpr int kNR = 128 / sizeof(T);

template <typename T>
inline void tile_full(const T* __restrict a, long ars, long aps,
                      const T* __restrict b, long n, int k,
                      T* __restrict c) {
  constexpr int NR = kNR<T>;
  T acc[kMR][NR];
  for (int r = 0; r < kMR; ++r) {
    for (int j = 0; j < NR; ++j) acc[r][j] = 0;
  }
  for (int p = 0; p < k; ++p) {
    const T* br = b + p * n;
#pragma GCC unroll 6
    for (int r = 0; r < kMR; ++r) {
      const T ar = a[r * ars + p * aps];
#pragma omp simd
      for (int j = 0; j < NR; ++j) acc[r][j] += ar * br[j];
    }
  }
  for (int r = 0; r < kMR; ++r) {
    for (int j = 0; j < NR; ++j) c[r * n + j] += acc[r][j];
  }
}

// Partial tile at the right or bottom edge.
template <typename T>
inline void tile_edge(const T* __restrict a, long ars, long aps,
                      const T* __restrict b, long n, int k, T* __restrict c,
                      int mr, int nr) {
  T acc[kMR][kNR<T>] = {};
  for (int p = 0; p < k; ++p) {
    const T* br = b + p * n;
    for (int r = 0; r < mr; ++r) {
      const T ar = a[r * ars + p * aps];
#pragma omp simd
      for (int j = 0; j < nr; ++j) acc[r][j] += ar * br[j];
    }
  }
  for (int r = 0; r < mr; ++r) {
    for (int j = 0; j < nr; ++j) c[r * n + j] += acc[r][j];
  }
}

}  // namespace

void set_max_threads(int threads) {
#ifdef _OPENMP
  static const int default_threads = omp_get_max_threads();
  omp_set_num_threads(threads > 0 ? threads : default_threads);
#else
  (void)threads;
#endif
}

int max_threads() {
  apply_env_threads();
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void keep_heap_warm() {
#ifdef __GLIBC__
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
  });
#endif
}

template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const T* a,
          const T* b, T* c, bool accumulate) {
  if (m <= 0 || n <= 0) return;
  if (!accumulate) std::fill(c, c + static_cast<long>(m) * n, T(0));
  if (k <= 0) return;
  const T* bk = b;
  std::vector<T> scratch;
  if (trans_b) {
    scratch.resize(static_cast<std::size_t>(k) * n);
    transpose_into(b, n, k, scratch.data());
    bk = scratch.data();
  }
  const long ars = trans_a ? 1 : k;
  const long aps = trans_a ? m : 1;
  constexpr int NR = kNR<T>;
  const int row_blocks = (m + kMR - 1) / kMR;
  const long work = static_cast<long>(m) * n * k;
#pragma omp parallel for schedule(static) if (go_parallel(work))
  for (int blk = 0; blk < row_blocks; ++blk) {
    const int i0 = blk * kMR;
    const int mr = std::min(kMR, m - i0);
    const T* ab = a + i0 * ars;
    for (int j0 = 0; j0 < n; j0 += NR) {
      const int nr = std::min(NR, n - j0);
      T* cb = c + static_cast<long>(i0) * n + j0;
      if (mr == kMR && nr == NR) {
        tile_full(ab, ars, aps, bk + j0, n, k, cb);
      } else {
        tile_edge(ab, ars, aps, bk + j0, n, k, cb, mr, nr);
      }
    }
  }
}

template <typename T>
void softmax_rows(const T* x, T* y, int rows, int cols) {
#pragma omp parallel for schedule(static) if (go_parallel(static_cast<long>(rows) * cols * 16))
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + static_cast<long>(r) * cols;
    T* yr = y + static_cast<long>(r) * cols;
    T mx = -std::numeric_limits<T>::infinity();
    for (int j = 0; j < cols; ++j) mx = std::max(mx, xr[j]);
    if (mx == -std::numeric_limits<T>::infinity()) {
      std::fill(yr, yr + cols, T(0));
      continue;
    }
    T sum = 0;
    for (int j = 0; j < cols; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      sum += yr[j];
    }
    const T inv = T(1) / sum;
    for (int j = 0; j < cols; ++j) yr[j] *= inv;
  }
}

template <typename T>
void layer_norm_rows(const T* x, const T* gamma, const T* beta, T* y, T* mean,
                     T* rstd, int rows, int cols, T eps) {
#pragma omp parallel for schedule(static) if (go_parallel(static_cast<long>(rows) * cols * 8))
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + static_cast<long>(r) * cols;
    T* yr = y + static_cast<long>(r) * cols;
    T mu = 0;
    for (int j = 0; j < cols; ++j) mu += xr[j];
    mu /= static_cast<T>(cols);
    T var = 0;
    for (int j = 0; j < cols; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<T>(cols);
    const T rs = T(1) / std::sqrt(var + eps);
    for (int j = 0; j < cols; ++j) {
      yr[j] = (xr[j] - mu) * rs * gamma[j] + beta[j];
    }
    if (mean != nullptr) mean[r] = mu;
    if (rstd != nullptr) rstd[r] = rs;
  }
}

namespace reference {

template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const T* a,
          const T* b, T* c, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T sum = 0;
      for (int p = 0; p < k; ++p) {
        const T av = trans_a ? a[static_cast<long>(p) * m + i]
                             : a[static_cast<long>(i) * k + p];
        const T bv = trans_b ? b[static_cast<long>(j) * k + p]
                             : b[static_cast<long>(p) * n + j];
        sum += av * bv;
      }
      T& out = c[static_cast<long>(i) * n + j];
      out = accumulate ? out + sum : sum;
    }
  }
}

template <typename T>
void softmax_rows(const T* x, T* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + static_cast<long>(r) * cols;
    T* yr = y + static_cast<long>(r) * cols;
    T mx = -std::numeric_limits<T>::infinity();
    for (int j = 0; j < cols; ++j) mx = std::max(mx, xr[j]);
    if (mx == -std::numeric_limits<T>::infinity()) {
      for (int j = 0; j < cols; ++j) yr[j] = 0;
      continue;
    }
    T sum = 0;
    for (int j = 0; j < cols; ++j) sum += std::exp(xr[j] - mx);
    for (int j = 0; j < cols; ++j) yr[j] = std::exp(xr[j] - mx) / sum;
  }
}

template <typename T>
void layer_norm_rows(const T* x, const T* gamma, const T* beta, T* y, T* mean,
                     T* rstd, int rows, int cols, T eps) {
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + static_cast<long>(r) * cols;
    T mu = 0;
    for (int j = 0; j < cols; ++j) mu += xr[j];
    mu /= static_cast<T>(cols);
    T var = 0;
    for (int j = 0; j < cols; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<T>(cols);
    const T rs = T(1) / std::sqrt(var + eps);
    for (int j = 0; j < cols; ++j) {
      y[static_cast<long>(r) * cols + j] =
          (xr[j] - mu) * rs * gamma[j] + beta[j];
    }
    if (mean != nullptr) mean[r] = mu;
    if (rstd != nullptr) rstd[r] = rs;
  }
}

}  // namespace reference

#define DPCSPELL_INSTANTIATE(T)                                              \
  template void gemm<T>(bool, bool, int, int, int, const T*, const T*, T*,   \
                        bool);                                               \
  template void softmax_rows<T>(const T*, T*, int, int);                     \
  template void layer_norm_rows<T>(const T*, const T*, const T*, T*, T*, T*, \
                                   int, int, T);                             \
  template void reference::gemm<T>(bool, bool, int, int, int, const T*,      \
                                   const T*, T*, bool);                      \
  template void reference::softmax_rows<T>(const T*, T*, int, int);          \
  template void reference::layer_norm_rows<T>(const T*, const T*, const T*,  \
                                              T*, T*, T*, int, int, T);

DPCSPELL_INSTANTIATE(float)
DPCSPELL_INSTANTIATE(double)

#undef DPCSPELL_INSTANTIATE

}  // namespace dpcspell::kernels
