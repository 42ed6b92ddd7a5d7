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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "dpcspell/kernels.hpp"
#include "dpcspell/rng.hpp"

using namespace dpcspell;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform01() * 2.0 - 1.0;
  return v;
}

// C = op(A) op(B) written out with explicit index arithmetic.
std::vector<double> naive_gemm(bool ta, bool tb, int m, int n, int k, const std::vector<double>& a,
                               const std::vector<double>& b) {
  std::vector<double> c(static_cast<std::size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int p = 0; p < k; ++p) {
        const double x = ta ? a[static_cast<std::size_t>(p) * m + i] : a[static_cast<std::size_t>(i) * k + p];
        const double y = tb ? b[static_cast<std::size_t>(j) * k + p] : b[static_cast<std::size_t>(p) * n + j];
        s += x * y;
      }
      c[static_cast<std::size_t>(i) * n + j] = s;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("gemm matches the naive product for every layout") {
  Rng rng(1);
  const int sizes[][3] = {{1, 1, 1}, {5, 7, 3}, {6, 16, 8}, {13, 33, 17}, {64, 70, 40}, {7, 129, 5}, {100, 3, 64}};
  for (const auto& s : sizes) {
    const int m = s[0], n = s[1], k = s[2];
    for (int layout = 0; layout < 4; ++layout) {
      const bool ta = layout & 1, tb = layout & 2;
      const auto a = random_values(rng, static_cast<std::size_t>(m) * k);
      const auto b = random_values(rng, static_cast<std::size_t>(k) * n);
      const auto want = naive_gemm(ta, tb, m, n, k, a, b);
      std::vector<double> par(want.size(), 0.5), ref(want.size(), 0.5);
      kernels::gemm(ta, tb, m, n, k, a.data(), b.data(), par.data(), false);
      kernels::reference::gemm(ta, tb, m, n, k, a.data(), b.data(), ref.data(), false);
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(par[i] == doctest::Approx(want[i]).epsilon(1e-12));
        CHECK(ref[i] == doctest::Approx(want[i]).epsilon(1e-12));
      }
      std::vector<double> acc(want.size(), 1.0);
      kernels::gemm(ta, tb, m, n, k, a.data(), b.data(), acc.data(), true);
      for (std::size_t i = 0; i < want.size(); ++i) CHECK(acc[i] == doctest::Approx(want[i] + 1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("float gemm agrees with the serial reference") {
  Rng rng(2);
  const int m = 37, n = 91, k = 29;
  std::vector<float> a(static_cast<std::size_t>(m) * k), b(static_cast<std::size_t>(k) * n);
  for (float& x : a) x = static_cast<float>(rng.uniform01() - 0.5);
  for (float& x : b) x = static_cast<float>(rng.uniform01() - 0.5);
  std::vector<float> par(static_cast<std::size_t>(m) * n), ref(par.size());
  kernels::gemm(false, false, m, n, k, a.data(), b.data(), par.data(), false);
  kernels::reference::gemm(false, false, m, n, k, a.data(), b.data(), ref.data(), false);
  for (std::size_t i = 0; i < par.size(); ++i) CHECK(par[i] == doctest::Approx(ref[i]).epsilon(1e-5));
}

TEST_CASE("softmax rows") {
  Rng rng(3);
  const double inf = std::numeric_limits<double>::infinity();
  const int rows = 9, cols = 13;
  auto x = random_values(rng, static_cast<std::size_t>(rows) * cols);
  for (int j = 0; j < cols; ++j) x[static_cast<std::size_t>(2) * cols + j] = -inf;
  x[static_cast<std::size_t>(4) * cols + 3] = -inf;
  std::vector<double> y(x.size()), r(x.size());
  kernels::softmax_rows(x.data(), y.data(), rows, cols);
  kernels::reference::softmax_rows(x.data(), r.data(), rows, cols);
  for (int i = 0; i < rows; ++i) {
    double sum = 0.0, z = 0.0;
    for (int j = 0; j < cols; ++j) z += std::exp(x[static_cast<std::size_t>(i) * cols + j]);
    for (int j = 0; j < cols; ++j) {
      const std::size_t at = static_cast<std::size_t>(i) * cols + j;
      sum += y[at];
      CHECK(y[at] == doctest::Approx(r[at]).epsilon(1e-14));
      if (i != 2) CHECK(y[at] == doctest::Approx(std::exp(x[at]) / z).epsilon(1e-12));
    }
    if (i == 2) {
      CHECK(sum == 0.0);
    } else {
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(y[static_cast<std::size_t>(4) * cols + 3] == 0.0);
  const double two[2] = {0.0, 0.0};
  double out[2];
  kernels::softmax_rows(two, out, 1, 2);
  CHECK(out[0] == doctest::Approx(0.5));
  CHECK(out[1] == doctest::Approx(0.5));
}

TEST_CASE("layer norm rows") {
  Rng rng(4);
  const int rows = 5, cols = 11;
  const auto x = random_values(rng, static_cast<std::size_t>(rows) * cols);
  const auto g = random_values(rng, cols);
  const auto b = random_values(rng, cols);
  std::vector<double> y(x.size()), r(x.size()), mean(rows), rstd(rows);
  kernels::layer_norm_rows(x.data(), g.data(), b.data(), y.data(), mean.data(), rstd.data(), rows, cols, 1e-5);
  kernels::reference::layer_norm_rows(x.data(), g.data(), b.data(), r.data(), static_cast<double*>(nullptr), static_cast<double*>(nullptr), rows, cols, 1e-5);
  for (int i = 0; i < rows; ++i) {
    double mu = 0.0, var = 0.0;
    for (int j = 0; j < cols; ++j) mu += x[static_cast<std::size_t>(i) * cols + j];
    mu /= cols;
    for (int j = 0; j < cols; ++j) var += std::pow(x[static_cast<std::size_t>(i) * cols + j] - mu, 2);
    var /= cols;
    CHECK(mean[i] == doctest::Approx(mu));
    CHECK(rstd[i] == doctest::Approx(1.0 / std::sqrt(var + 1e-5)));
    for (int j = 0; j < cols; ++j) {
      const std::size_t at = static_cast<std::size_t>(i) * cols + j;
      const double want = (x[at] - mu) / std::sqrt(var + 1e-5) * g[j] + b[j];
      CHECK(y[at] == doctest::Approx(want).epsilon(1e-12));
      CHECK(r[at] == doctest::Approx(want).epsilon(1e-12));
    }
  }
  // constant rows normalize to zero before the affine part
  const std::vector<double> c(4, 3.0), ones(4, 1.0), zeros(4, 0.0);
  std::vector<double> out(4);
  kernels::layer_norm_rows(c.data(), ones.data(), zeros.data(), out.data(), static_cast<double*>(nullptr), static_cast<double*>(nullptr), 1, 4, 1e-5);
  for (double v : out) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("thread cap") {
  const int before = kernels::max_threads();
  kernels::set_max_threads(1);
  CHECK(kernels::max_threads() == 1);
  kernels::set_max_threads(0);
  CHECK(kernels::max_threads() >= 1);
  kernels::set_max_threads(before);
}
