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

#include "dpcspell/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dpcspell/errors.hpp"
#include "dpcspell/kernels.hpp"

namespace dpcspell {

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

std::size_t product(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) n *= static_cast<std::size_t>(d);
  return n;
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " +
                   shape_string(a) + " and " + shape_string(b));
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape s, T fill)
    : shape(std::move(s)), values(product(shape), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape s, std::vector<T> v)
    : shape(std::move(s)), values(std::move(v)) {
  if (values.size() != product(shape)) {
    throw ShapeError("tensor: " + std::to_string(values.size()) +
                     " values do not fill shape " + shape_string(shape));
  }
}

template <typename T>
int Tensor<T>::rows() const {
  return cols() == 0 ? 0 : static_cast<int>(values.size() / cols());
}

template <typename T>
int Tensor<T>::cols() const {
  return shape.empty() ? 1 : shape.back();
}

template <typename T>
void Tensor<T>::zero_grad() {
  grad.assign(values.size(), T(0));
}

template <typename T>
Var Graph<T>::push(Shape shape, std::vector<T> value, bool needs_grad) {
  Node node;
  node.shape = std::move(shape);
  node.value = std::move(value);
  node.needs_grad = record_ && needs_grad;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
void Graph<T>::check(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw GraphError("variable does not belong to this graph");
  }
}

template <typename T>
const T* Graph<T>::val(Var v) const {
  const Node& n = nodes_[v.id];
  return n.external != nullptr ? n.external->values.data() : n.value.data();
}

template <typename T>
std::size_t Graph<T>::numel(Var v) const {
  const Node& n = nodes_[v.id];
  return n.external != nullptr ? n.external->values.size() : n.value.size();
}

template <typename T>
T* Graph<T>::grad_buffer(Var v) {
  Node& n = nodes_[v.id];
  if (n.external != nullptr) return n.external->grad.data();
  if (n.grad.empty()) n.grad.assign(n.value.size(), T(0));
  return n.grad.data();
}

template <typename T>
std::span<const T> Graph<T>::value(Var v) const {
  check(v);
  return {val(v), numel(v)};
}

template <typename T>
std::span<const T> Graph<T>::grad(Var v) const {
  check(v);
  const Node& n = nodes_[v.id];
  if (n.external != nullptr) return n.external->grad;
  return n.grad;
}

template <typename T>
T Graph<T>::scalar(Var v) const {
  check(v);
  if (numel(v) != 1) {
    throw ShapeError("scalar: node has shape " + shape_string(shape(v)));
  }
  return val(v)[0];
}

template <typename T>
Var Graph<T>::constant(Tensor<T> t) {
  return push(std::move(t.shape), std::move(t.values), false);
}

template <typename T>
Var Graph<T>::leaf(Tensor<T>& t) {
  Node node;
  node.shape = t.shape;
  node.external = &t;
  node.needs_grad = record_ && t.requires_grad;
  if (node.needs_grad && t.grad.size() != t.values.size()) t.zero_grad();
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Var Graph<T>::view(const Tensor<T>& t) {
  Node node;
  node.shape = t.shape;
  // Only values are read through a view: needs_grad stays false, so no
  // backward pass ever writes to it.
  node.external = const_cast<Tensor<T>*>(&t);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
void Graph<T>::backward(Var loss) {
  check(loss);
  if (!record_) throw GraphError("backward on a non-recording graph");
  if (backward_done_) {
    throw GraphError("backward already ran on this graph; build a new one");
  }
  if (numel(loss) != 1) {
    throw GraphError("backward needs a scalar loss, got shape " +
                     shape_string(shape(loss)));
  }
  backward_done_ = true;
  if (!nodes_[loss.id].needs_grad) return;
  grad_buffer(loss)[0] += T(1);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || !n.backward) continue;
    if (n.external == nullptr && n.grad.empty()) continue;
    n.backward();
  }
  for (Node& n : nodes_) {
    n.backward = nullptr;
    std::vector<T>().swap(n.aux);
  }
}

template <typename T>
Var Graph<T>::matmul(Var a, Var b) {
  check(a);
  check(b);
  const Shape& sa = shape(a);
  const Shape& sb = shape(b);
  if (sa.empty() || sb.size() != 2 || sa.back() != sb[0]) {
    shape_error("matmul", sa, sb);
  }
  const int k = sb[0];
  const int n = sb[1];
  const int m = static_cast<int>(numel(a) / static_cast<std::size_t>(k));
  Shape out_shape = sa;
  out_shape.back() = n;
  std::vector<T> out(static_cast<std::size_t>(m) * n);
  kernels::gemm(false, false, m, n, k, val(a), val(b), out.data(), false);
  Var y = push(std::move(out_shape), std::move(out), needs(a) || needs(b));
  if (nodes_[y.id].needs_grad) {
    nodes_[y.id].backward = [this, a, b, y, m, n, k] {
      const T* gy = grad_buffer(y);
      if (needs(a)) {
        kernels::gemm(false, true, m, k, n, gy, val(b), grad_buffer(a), true);
      }
      if (needs(b)) {
        kernels::gemm(true, false, k, n, m, val(a), gy, grad_buffer(b), true);
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::add(Var a, Var b) {
  check(a);
  check(b);
  const Shape& sa = shape(a);
  const Shape& sb = shape(b);
  const bool same = sa == sb;
  const bool broadcast =
      !same && sb.size() == 1 && !sa.empty() && sa.back() == sb[0];
  if (!same && !broadcast) shape_error("add", sa, sb);
  const std::size_t total = numel(a);
  const std::size_t cols = broadcast ? static_cast<std::size_t>(sb[0]) : total;
  std::vector<T> out(total);
  const T* av = val(a);
  const T* bv = val(b);
  for (std::size_t r = 0; r < total; r += cols) {
    for (std::size_t c = 0; c < cols; ++c) out[r + c] = av[r + c] + bv[c];
  }
  Var y = push(sa, std::move(out), needs(a) || needs(b));
  if (nodes_[y.id].needs_grad) {
    nodes_[y.id].backward = [this, a, b, y, total, cols] {
      const T* gy = grad_buffer(y);
      if (needs(a)) {
        T* ga = grad_buffer(a);
        for (std::size_t i = 0; i < total; ++i) ga[i] += gy[i];
      }
      if (needs(b)) {
        T* gb = grad_buffer(b);
        for (std::size_t r = 0; r < total; r += cols) {
          for (std::size_t c = 0; c < cols; ++c) gb[c] += gy[r + c];
        }
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::mul(Var a, Var b) {
  check(a);
  check(b);
  if (shape(a) != shape(b)) shape_error("mul", shape(a), shape(b));
  const std::size_t total = numel(a);
  std::vector<T> out(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = val(a)[i] * val(b)[i];
  Var y = push(shape(a), std::move(out), needs(a) || needs(b));
  if (nodes_[y.id].needs_grad) {
    nodes_[y.id].backward = [this, a, b, y, total] {
      const T* gy = grad_buffer(y);
      if (needs(a)) {
        T* ga = grad_buffer(a);
        for (std::size_t i = 0; i < total; ++i) ga[i] += gy[i] * val(b)[i];
      }
      if (needs(b)) {
        T* gb = grad_buffer(b);
        for (std::size_t i = 0; i < total; ++i) gb[i] += gy[i] * val(a)[i];
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::scale(Var a, T s) {
  check(a);
  const std::size_t total = numel(a);
  std::vector<T> out(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = val(a)[i] * s;
  Var y = push(shape(a), std::move(out), needs(a));
  if (nodes_[y.id].needs_grad) {
    nodes_[y.id].backward = [this, a, y, total, s] {
      const T* gy = grad_buffer(y);
      T* ga = grad_buffer(a);
      for (std::size_t i = 0; i < total; ++i) ga[i] += gy[i] * s;
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::transpose(Var a) {
  check(a);
  const Shape& sa = shape(a);
  if (sa.size() < 2) shape_error("transpose", sa, sa);
  const int r = sa[sa.size() - 2];
  const int c = sa.back();
  const std::size_t plane = static_cast<std::size_t>(r) * c;
  const std::size_t batch = plane == 0 ? 0 : numel(a) / plane;
  Shape out_shape = sa;
  std::swap(out_shape[sa.size() - 2], out_shape.back());
  std::vector<T> out(numel(a));
  const T* av = val(a);
  for (std::size_t bt = 0; bt < batch; ++bt) {
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) {
        out[bt * plane + static_cast<std::size_t>(j) * r + i] =
            av[bt * plane + static_cast<std::size_t>(i) * c + j];
      }
    }
  }
  Var y = push(std::move(out_shape), std::move(out), needs(a));
  if (nodes_[y.id].needs_grad) {
    nodes_[y.id].backward = [this, a, y, r, c, plane, batch] {
      const T* gy = grad_buffer(y);
      T* ga = grad_buffer(a);
      for (std::size_t bt = 0; bt < batch; ++bt) {
        for (int i = 0; i < r; ++i) {
          for (int j = 0; j < c; ++j) {
            ga[bt * plane + static_cast<std::size_t>(i) * c + j] +=
                gy[bt * plane + static_cast<std::size_t>(j) * r + i];
          }
        }
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  for (Var p : parts) check(p);
  const Shape& first = shape(parts[0]);
  if (first.empty()) shape_error("concat", first, first);
  std::vector<int> widths;
  int total_cols = 0;
  bool any_needs = false;
  for (Var p : parts) {
    const Shape& s = shape(p);
    if (s.size() != first.size() ||
        !std::equal(s.begin(), s.end() - 1, first.begin())) {
      shape_error("concat", first, s);
    }
    widths.push_back(s.back());
    total_cols += s.back();
    any_needs = any_needs || needs(p);
  }
  const std::size_t rows =
      first.back() == 0 ? product(Shape(first.begin(), first.end() - 1))
                        : numel(parts[0]) / static_cast<std::size_t>(first.back());
  Shape out_shape = first;
  out_shape.back() = total_cols;
  std::vector<T> out(rows * static_cast<std::size_t>(total_cols));
  int offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const T* pv = val(parts[p]);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv + r * widths[p], widths[p],
                  out.data() + r * total_cols + offset);
    }
    offset += widths[p];
  }
  Var y = push(std::move(out_shape), std::move(out), any_needs);
  if (nodes_[y.id].needs_grad) {
    std::vector<Var> inputs(parts.begin(), parts.end());
    nodes_[y.id].backward = [this, inputs, widths, rows, total_cols, y] {
      const T* gy = grad_buffer(y);
      int off = 0;
      for (std::size_t p = 0; p < inputs.size(); ++p) {
        if (needs(inputs[p])) {
          T* gp = grad_buffer(inputs[p]);
          for (std::size_t r = 0; r < rows; ++r) {
            for (int c = 0; c < widths[p]; ++c) {
              gp[r * widths[p] + c] += gy[r * total_cols + off + c];
            }
          }
        }
        off += widths[p];
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::slice(Var a, int begin, int end) {
  check(a);
  const Shape& sa = shape(a);
  if (sa.empty() || begin < 0 || end > sa.back() || begin > end) {
    throw ShapeError("slice: columns [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") out of range for " +
                     shape_string(sa));
  }
  const int cols = sa.back();
  const int width = end - begin;
  const std::size_t rows = cols == 0 ? 0 : numel(a) / cols;
  Shape out_shape = sa;
  out_shape.back() = width;
  std::vector<T> out(rows * width);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(val(a) + r * cols + begin, width, out.data() + r * width);
  }
  Var y = push(std::move(out_shape), std::move(out), needs(a));
  if (nodes_[y.id].needs_grad) {
    nodes_[y.id].backward = [this, a, y, rows, cols, width, begin] {
      const T* gy = grad_buffer(y);
      T* ga = grad_buffer(a);
      for (std::size_t r = 0; r < rows; ++r) {
        for (int c = 0; c < width; ++c) {
          ga[r * cols + begin + c] += gy[r * width + c];
        }
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::embedding(Var table, std::span<const std::int32_t> ids) {
  check(table);
  const Shape& st = shape(table);
  if (st.size() != 2) shape_error("embedding", st, Shape{});
  const int vocab = st[0];
  const int width = st[1];
  std::vector<std::int32_t> idx(ids.begin(), ids.end());
  for (std::int32_t id : idx) {
    if (id < 0 || id >= vocab) {
      throw ShapeError("embedding: id " + std::to_string(id) +
                       " outside table of " + std::to_string(vocab) + " rows");
    }
  }
  std::vector<T> out(idx.size() * width);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy_n(val(table) + static_cast<std::size_t>(idx[r]) * width, width,
                out.data() + r * width);
  }
  Var y = push(Shape{static_cast<int>(idx.size()), width}, std::move(out),
               needs(table));
  if (nodes_[y.id].needs_grad) {
    nodes_[y.id].backward = [this, table, y, idx = std::move(idx), width] {
      const T* gy = grad_buffer(y);
      T* gt = grad_buffer(table);
      for (std::size_t r = 0; r < idx.size(); ++r) {
        T* dst = gt + static_cast<std::size_t>(idx[r]) * width;
        for (int c = 0; c < width; ++c) dst[c] += gy[r * width + c];
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::layer_norm(Var x, Var gamma, Var beta, T eps) {
  check(x);
  check(gamma);
  check(beta);
  const Shape& sx = shape(x);
  if (sx.empty() || shape(gamma) != Shape{sx.back()} ||
      shape(beta) != Shape{sx.back()}) {
    shape_error("layer_norm", sx, shape(gamma));
  }
  const int cols = sx.back();
  const int rows = cols == 0 ? 0 : static_cast<int>(numel(x) / cols);
  std::vector<T> out(numel(x));
  std::vector<T> stats(static_cast<std::size_t>(rows) * 2);
  kernels::layer_norm_rows(val(x), val(gamma), val(beta), out.data(),
                           stats.data(), stats.data() + rows, rows, cols, eps);
  Var y = push(sx, std::move(out), needs(x) || needs(gamma) || needs(beta));
  Node& node = nodes_[y.id];
  if (node.needs_grad) {
    node.aux = std::move(stats);
    node.backward = [this, x, gamma, beta, y, rows, cols] {
      const T* gy = grad_buffer(y);
      const T* xv = val(x);
      const T* gv = val(gamma);
      const std::vector<T>& st = nodes_[y.id].aux;
      T* gx = needs(x) ? grad_buffer(x) : nullptr;
      T* gg = needs(gamma) ? grad_buffer(gamma) : nullptr;
      T* gb = needs(beta) ? grad_buffer(beta) : nullptr;
      std::vector<T> xhat(cols);
      std::vector<T> gh(cols);
      for (int r = 0; r < rows; ++r) {
        const T mu = st[r];
        const T rs = st[rows + r];
        const T* xr = xv + static_cast<std::size_t>(r) * cols;
        const T* gr = gy + static_cast<std::size_t>(r) * cols;
        T mean_gh = 0;
        T mean_gh_xhat = 0;
        for (int c = 0; c < cols; ++c) {
          xhat[c] = (xr[c] - mu) * rs;
          gh[c] = gr[c] * gv[c];
          mean_gh += gh[c];
          mean_gh_xhat += gh[c] * xhat[c];
          if (gg != nullptr) gg[c] += gr[c] * xhat[c];
          if (gb != nullptr) gb[c] += gr[c];
        }
        mean_gh /= static_cast<T>(cols);
        mean_gh_xhat /= static_cast<T>(cols);
        if (gx != nullptr) {
          T* gxr = gx + static_cast<std::size_t>(r) * cols;
          for (int c = 0; c < cols; ++c) {
            gxr[c] += rs * (gh[c] - mean_gh - xhat[c] * mean_gh_xhat);
          }
        }
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::relu(Var x) {
  check(x);
  const std::size_t total = numel(x);
  std::vector<T> out(total);
  const T* xv = val(x);
  for (std::size_t i = 0; i < total; ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
  Var y = push(shape(x), std::move(out), needs(x));
  if (nodes_[y.id].needs_grad) {
    nodes_[y.id].backward = [this, x, y, total] {
      const T* gy = grad_buffer(y);
      const T* xv2 = val(x);
      T* gx = grad_buffer(x);
      for (std::size_t i = 0; i < total; ++i) {
        if (xv2[i] > T(0)) gx[i] += gy[i];
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::dropout(Var x, T p, Rng& rng, bool train) {
  check(x);
  if (!train || p <= T(0)) return x;
  if (p >= T(1)) throw GraphError("dropout probability must be below 1");
  const std::size_t total = numel(x);
  std::vector<T> keep(total);
  const T survivor = T(1) / (T(1) - p);
  // Two 32-bit uniforms per 64-bit draw.
  const auto cut = static_cast<std::uint64_t>(static_cast<double>(p) * 4294967296.0);
  for (std::size_t i = 0; i < total; i += 2) {
    const std::uint64_t r = rng.next();
    keep[i] = (r & 0xFFFFFFFFu) < cut ? T(0) : survivor;
    if (i + 1 < total) keep[i + 1] = (r >> 32) < cut ? T(0) : survivor;
  }
  std::vector<T> out(total);
  const T* xv = val(x);
  for (std::size_t i = 0; i < total; ++i) out[i] = xv[i] * keep[i];
  Var y = push(shape(x), std::move(out), needs(x));
  Node& node = nodes_[y.id];
  if (node.needs_grad) {
    node.aux = std::move(keep);
    node.backward = [this, x, y, total] {
      const T* gy = grad_buffer(y);
      const std::vector<T>& k = nodes_[y.id].aux;
      T* gx = grad_buffer(x);
      for (std::size_t i = 0; i < total; ++i) gx[i] += gy[i] * k[i];
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::softmax(Var x) {
  check(x);
  const Shape& sx = shape(x);
  const int cols = sx.empty() ? 1 : sx.back();
  const int rows = cols == 0 ? 0 : static_cast<int>(numel(x) / cols);
  std::vector<T> out(numel(x));
  kernels::softmax_rows(val(x), out.data(), rows, cols);
  Var y = push(sx, std::move(out), needs(x));
  if (nodes_[y.id].needs_grad) {
    nodes_[y.id].backward = [this, x, y, rows, cols] {
      const T* gy = grad_buffer(y);
      const T* yv = val(y);
      T* gx = grad_buffer(x);
      for (int r = 0; r < rows; ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * cols;
        T dot = 0;
        for (int c = 0; c < cols; ++c) dot += gy[base + c] * yv[base + c];
        for (int c = 0; c < cols; ++c) {
          gx[base + c] += yv[base + c] * (gy[base + c] - dot);
        }
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::sum(Var x) {
  check(x);
  const std::size_t total = numel(x);
  T s = 0;
  for (std::size_t i = 0; i < total; ++i) s += val(x)[i];
  Var y = push(Shape{}, std::vector<T>{s}, needs(x));
  if (nodes_[y.id].needs_grad) {
    nodes_[y.id].backward = [this, x, y, total] {
      const T g = grad_buffer(y)[0];
      T* gx = grad_buffer(x);
      for (std::size_t i = 0; i < total; ++i) gx[i] += g;
    };
  }
  return y;
}

namespace {

// Copies head columns [col, col + dk) of `rows` consecutive rows into a
// contiguous block.
template <typename T>
void gather_head(const T* src, int rows, int width, int col, int dk, T* dst) {
  for (int r = 0; r < rows; ++r) {
    std::copy_n(src + static_cast<std::size_t>(r) * width + col, dk,
                dst + static_cast<std::size_t>(r) * dk);
  }
}

template <typename T>
void scatter_head_add(const T* src, int rows, int width, int col, int dk,
                      T* dst) {
  for (int r = 0; r < rows; ++r) {
    T* d = dst + static_cast<std::size_t>(r) * width + col;
    const T* s = src + static_cast<std::size_t>(r) * dk;
    for (int c = 0; c < dk; ++c) d[c] += s[c];
  }
}

}  // namespace

template <typename T>
Var Graph<T>::attention(Var q, Var k, Var v, const AttentionLayout& layout) {
  check(q);
  check(k);
  check(v);
  const Shape& sq = shape(q);
  const Shape& sk = shape(k);
  const Shape& sv = shape(v);
  const int B = layout.batch;
  const int tq = layout.query_len;
  const int tk = layout.key_len;
  const int heads = layout.heads;
  if (sq.size() != 2 || sk.size() != 2 || sk != sv || sq[1] != sk[1] ||
      sq[0] != B * tq || sk[0] != B * tk || heads <= 0 || sq[1] % heads != 0) {
    shape_error("attention", sq, sk);
  }
  if (!layout.allowed.empty() &&
      layout.allowed.size() != static_cast<std::size_t>(B) * tq * tk) {
    throw ShapeError("attention: mask has " +
                     std::to_string(layout.allowed.size()) +
                     " entries, expected " + std::to_string(B * tq * tk));
  }
  const int H = sq[1];
  const int dk = H / heads;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dk));
  const std::size_t plane = static_cast<std::size_t>(tq) * tk;
  std::vector<T> probs(static_cast<std::size_t>(B) * heads * plane);
  std::vector<T> out(static_cast<std::size_t>(B) * tq * H, T(0));
  const T* qv = val(q);
  const T* kv = val(k);
  const T* vv = val(v);
  const int pairs = B * heads;
  const long work = static_cast<long>(pairs) * tq * tk * dk;

#pragma omp parallel for schedule(static) if (kernels::max_threads() > 1 && pairs > 1 && work > 65536)
  for (int bh = 0; bh < pairs; ++bh) {
    const int b = bh / heads;
    const int col = (bh % heads) * dk;
    std::vector<T> qh(static_cast<std::size_t>(tq) * dk);
    std::vector<T> kh(static_cast<std::size_t>(tk) * dk);
    std::vector<T> vh(static_cast<std::size_t>(tk) * dk);
    std::vector<T> oh(static_cast<std::size_t>(tq) * dk);
    gather_head(qv + static_cast<std::size_t>(b) * tq * H, tq, H, col, dk, qh.data());
    gather_head(kv + static_cast<std::size_t>(b) * tk * H, tk, H, col, dk, kh.data());
    gather_head(vv + static_cast<std::size_t>(b) * tk * H, tk, H, col, dk, vh.data());
    T* P = probs.data() + static_cast<std::size_t>(bh) * plane;
    kernels::gemm(false, true, tq, tk, dk, qh.data(), kh.data(), P, false);
    for (int i = 0; i < tq; ++i) {
      T* row = P + static_cast<std::size_t>(i) * tk;
      for (int j = 0; j < tk; ++j) {
        row[j] = layout.is_allowed(b, i, j)
                     ? row[j] * inv_sqrt
                     : -std::numeric_limits<T>::infinity();
      }
    }
    kernels::reference::softmax_rows(P, P, tq, tk);
    kernels::gemm(false, false, tq, dk, tk, P, vh.data(), oh.data(), false);
    scatter_head_add(oh.data(), tq, H, col,  dk,
                     out.data() + static_cast<std::size_t>(b) * tq * H);
  }

  Var y = push(sq, std::move(out), needs(q) || needs(k) || needs(v));
  Node& node = nodes_[y.id];
  node.aux = std::move(probs);
  if (node.needs_grad) {
    node.backward = [this, q, k, v, y, B, tq, tk, heads, H, dk, inv_sqrt,
                     plane, work] {
      const T* gy = grad_buffer(y);
      const T* qv2 = val(q);
      const T* kv2 = val(k);
      const T* vv2 = val(v);
      T* gq = needs(q) ? grad_buffer(q) : nullptr;
      T* gk = needs(k) ? grad_buffer(k) : nullptr;
      T* gv = needs(v) ? grad_buffer(v) : nullptr;
      const std::vector<T>& probs2 = nodes_[y.id].aux;
      const int pairs2 = B * heads;
      // Each (batch, head) block owns disjoint rows and columns of the
      // gradients, even when q, k and v are the same node.
#pragma omp parallel for schedule(static) if (kernels::max_threads() > 1 && pairs2 > 1 && work > 65536)
      for (int bh = 0; bh < pairs2; ++bh) {
        const int b = bh / heads;
        const int col = (bh % heads) * dk;
        const std::size_t qoff = static_cast<std::size_t>(b) * tq * H;
        const std::size_t koff = static_cast<std::size_t>(b) * tk * H;
        const T* P = probs2.data() + static_cast<std::size_t>(bh) * plane;
        std::vector<T> qh(static_cast<std::size_t>(tq) * dk);
        std::vector<T> kh(static_cast<std::size_t>(tk) * dk);
        std::vector<T> vh(static_cast<std::size_t>(tk) * dk);
        std::vector<T> goh(static_cast<std::size_t>(tq) * dk);
        std::vector<T> ds(plane);
        std::vector<T> tmp(static_cast<std::size_t>(std::max(tq, tk)) * dk);
        gather_head(qv2 + qoff, tq, H, col, dk, qh.data());
        gather_head(kv2 + koff, tk, H, col, dk, kh.data());
        gather_head(vv2 + koff, tk, H, col, dk, vh.data());
        gather_head(gy + qoff, tq, H, col, dk, goh.data());
        if (gv != nullptr) {
          kernels::gemm(true, false, tk, dk, tq, P, goh.data(), tmp.data(), false);
          scatter_head_add(tmp.data(), tk, H, col, dk, gv + koff);
        }
        // dP = dO V^T, then dS = P * (dP - rowsum(P * dP)) / sqrt(dk).
        kernels::gemm(false, true, tq, tk, dk, goh.data(), vh.data(), ds.data(), false);
        for (int i = 0; i < tq; ++i) {
          const T* Pi = P + static_cast<std::size_t>(i) * tk;
          T* di = ds.data() + static_cast<std::size_t>(i) * tk;
          T dot = 0;
          for (int j = 0; j < tk; ++j) dot += Pi[j] * di[j];
          for (int j = 0; j < tk; ++j) di[j] = Pi[j] * (di[j] - dot) * inv_sqrt;
        }
        if (gq != nullptr) {
          kernels::gemm(false, false, tq, dk, tk, ds.data(), kh.data(), tmp.data(), false);
          scatter_head_add(tmp.data(), tq, H, col, dk, gq + qoff);
        }
        if (gk != nullptr) {
          kernels::gemm(true, false, tk, dk, tq, ds.data(), qh.data(), tmp.data(), false);
          scatter_head_add(tmp.data(), tk, H, col, dk, gk + koff);
        }
      }
    };
  }
  return y;
}

template <typename T>
std::span<const T> Graph<T>::attention_weights(Var attention_out) const {
  check(attention_out);
  return nodes_[attention_out.id].aux;
}

template <typename T>
Var Graph<T>::cross_entropy(Var logits, std::span<const std::int32_t> targets,
                            std::int32_t ignore_id) {
  check(logits);
  const Shape& sl = shape(logits);
  if (sl.size() != 2 || static_cast<std::size_t>(sl[0]) != targets.size()) {
    throw ShapeError("cross_entropy: logits " + shape_string(sl) + " vs " +
                     std::to_string(targets.size()) + " targets");
  }
  const int rows = sl[0];
  const int V = sl[1];
  std::vector<std::int32_t> tgt(targets.begin(), targets.end());
  int count = 0;
  for (std::int32_t t : tgt) {
    if (t == ignore_id) continue;
    if (t < 0 || t >= V) {
      throw ShapeError("cross_entropy: target " + std::to_string(t) +
                       " outside " + std::to_string(V) + " classes");
    }
    ++count;
  }
  if (count == 0) throw GraphError("cross_entropy: every target is ignored");
  std::vector<T> probs(static_cast<std::size_t>(rows) * V);
  kernels::softmax_rows(val(logits), probs.data(), rows, V);
  const T* lv = val(logits);
  double total = 0.0;
  for (int r = 0; r < rows; ++r) {
    if (tgt[r] == ignore_id) continue;
    const T* lr = lv + static_cast<std::size_t>(r) * V;
    T mx = lr[0];
    for (int c = 1; c < V; ++c) mx = std::max(mx, lr[c]);
    double se = 0.0;
    for (int c = 0; c < V; ++c) se += std::exp(static_cast<double>(lr[c] - mx));
    total += -(static_cast<double>(lr[tgt[r]] - mx) - std::log(se));
  }
  Var y = push(Shape{}, std::vector<T>{static_cast<T>(total / count)},
               needs(logits));
  Node& node = nodes_[y.id];
  if (node.needs_grad) {
    node.aux = std::move(probs);
    node.backward = [this, logits, y, tgt = std::move(tgt), ignore_id, rows,
                     V, count] {
      const T g = grad_buffer(y)[0] / static_cast<T>(count);
      const std::vector<T>& p = nodes_[y.id].aux;
      T* gl = grad_buffer(logits);
      for (int r = 0; r < rows; ++r) {
        if (tgt[r] == ignore_id) continue;
        const std::size_t base = static_cast<std::size_t>(r) * V;
        for (int c = 0; c < V; ++c) gl[base + c] += g * p[base + c];
        gl[base + tgt[r]] -= g;
      }
    };
  }
  return y;
}

template <typename T>
T clip_grad_norm(std::span<Tensor<T>* const> params, T max_norm) {
  double sq = 0.0;
  for (const Tensor<T>* p : params) {
    for (T g : p->grad) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (!(norm > static_cast<double>(max_norm))) return T(1);
  const T s = static_cast<T>(static_cast<double>(max_norm) / norm);
  for (Tensor<T>* p : params) {
    for (T& g : p->grad) g *= s;
  }
  return s;
}

template <typename T>
Adam<T>::Adam(std::vector<Tensor<T>*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (const Tensor<T>* p : params_) {
    m_.emplace_back(p->values.size(), T(0));
    v_.emplace_back(p->values.size(), T(0));
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (Tensor<T>* p : params_) p->zero_grad();
}

template <typename T>
void Adam<T>::step() {
  for (const Tensor<T>* p : params_) {
    for (T g : p->grad) {
      if (!std::isfinite(g)) {
        throw DivergenceError("non-finite gradient at optimizer step " +
                              std::to_string(step_ + 1));
      }
    }
  }
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const T c1 = static_cast<T>(1.0 - std::pow(b1, static_cast<double>(step_)));
  const T c2 = static_cast<T>(1.0 - std::pow(b2, static_cast<double>(step_)));
  const T lr = static_cast<T>(config_.learning_rate);
  const T eps = static_cast<T>(config_.epsilon);
  const T tb1 = static_cast<T>(b1);
  const T tb2 = static_cast<T>(b2);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor<T>& p = *params_[i];
    if (p.grad.size() != p.values.size()) continue;
    T* m = m_[i].data();
    T* v = v_[i].data();
    const std::size_t n = p.values.size();
    for (std::size_t j = 0; j < n; ++j) {
      const T g = p.grad[j];
      m[j] = tb1 * m[j] + (T(1) - tb1) * g;
      v[j] = tb2 * v[j] + (T(1) - tb2) * g * g;
      const T mhat = m[j] / c1;
      const T vhat = v[j] / c2;
      p.values[j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

template struct Tensor<float>;
template struct Tensor<double>;
template class Graph<float>;
template class Graph<double>;
template class Adam<float>;
template class Adam<double>;
template float clip_grad_norm<float>(std::span<Tensor<float>* const>, float);
template double clip_grad_norm<double>(std::span<Tensor<double>* const>,
                                       double);

}  // namespace dpcspell
