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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dpcspell/rng.hpp"

namespace dpcspell {

using Shape = std::vector<int>;

std::string shape_string(const Shape& shape);

// Dense row-major array with an optional gradient of the same shape.
template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> values;
  std::vector<T> grad;
  bool requires_grad = false;

  Tensor() = default;
  explicit Tensor(Shape s, T fill = T(0));
  Tensor(Shape s, std::vector<T> v);

  std::size_t size() const { return values.size(); }
  // Product of every dimension but the last.
  int rows() const;
  // Last dimension (1 for scalars).
  int cols() const;
  void zero_grad();
};

// Handle to a node of a Graph.
struct Var {
  int id = -1;
};

// Which keys each query may attend to in a batched multi-head attention.
// `allowed` is batch x query_len x key_len; empty means everything is
// allowed. Queries of batch b occupy rows [b * query_len, (b+1) * query_len)
// of the query matrix; keys likewise with key_len.
struct AttentionLayout {
  int batch = 1;
  int query_len = 0;
  int key_len = 0;
  int heads = 1;
  std::vector<std::uint8_t> allowed;

  bool is_allowed(int b, int i, int j) const {
    return allowed.empty() ||
           allowed[(static_cast<std::size_t>(b) * query_len + i) * key_len +
                   j] != 0;
  }
};

// Reverse-mode tape. Every op appends a node; backward() walks the nodes in
// reverse creation order. A graph built with `record = false` only computes
// values (inference), and a graph can be differentiated once.
template <typename T>
class Graph {
 public:
  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }

  // Constant input; never receives a gradient.
  Var constant(Tensor<T> t);
  // Leaf bound to caller-owned storage. When the tensor requires a gradient
  // and the graph records, backward() accumulates into `t.grad`.
  Var leaf(Tensor<T>& t);
  // Read-only binding of caller-owned storage; never receives a gradient.
  Var view(const Tensor<T>& t);

  const Shape& shape(Var v) const { return nodes_[v.id].shape; }
  std::span<const T> value(Var v) const;
  // Gradient of an intermediate node after backward (empty if none).
  std::span<const T> grad(Var v) const;
  T scalar(Var v) const;

  // Populates gradients for the scalar `loss`. Throws GraphError for
  // non-scalar losses, a non-recording graph, or a second call.
  void backward(Var loss);

  // a: [..., k] (flattened to rows x k), b: [k, n] -> [..., n].
  Var matmul(Var a, Var b);
  // Same shape, or b one-dimensional and broadcast along a's last dim.
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, T s);
  // Swaps the last two dimensions.
  Var transpose(Var a);
  Var concat(std::span<const Var> parts);
  // Columns [begin, end) of the last dimension.
  Var slice(Var a, int begin, int end);
  // table: [V, H]; returns [ids.size(), H].
  Var embedding(Var table, std::span<const std::int32_t> ids);
  Var layer_norm(Var x, Var gamma, Var beta, T eps = T(1e-5));
  Var relu(Var x);
  // Train mode zeroes each element with probability p and scales survivors
  // by 1/(1-p). Eval mode, or p == 0, returns x itself.
  Var dropout(Var x, T p, Rng& rng, bool train);
  Var softmax(Var x);
  Var sum(Var x);
  // Fused scaled dot-product attention for all heads: q is
  // [batch*query_len, H], k and v are [batch*key_len, H]; head h uses
  // columns [h*H/heads, (h+1)*H/heads). Returns the concatenated head
  // outputs [batch*query_len, H]. Masked keys get -inf scores; a row with no
  // allowed key outputs zeros.
  Var attention(Var q, Var k, Var v, const AttentionLayout& layout);
  // Attention probabilities of an attention node:
  // batch x heads x query_len x key_len.
  std::span<const T> attention_weights(Var attention_out) const;
  // Mean over non-ignored rows of -log softmax(logits)[target].
  Var cross_entropy(Var logits, std::span<const std::int32_t> targets,
                    std::int32_t ignore_id);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Shape shape;
    std::vector<T> value;
    Tensor<T>* external = nullptr;
    std::vector<T> grad;
    std::vector<T> aux;
    bool needs_grad = false;
    std::function<void()> backward;
  };

  Var push(Shape shape, std::vector<T> value, bool needs_grad);
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }
  const T* val(Var v) const;
  T* grad_buffer(Var v);
  std::size_t numel(Var v) const;
  void check(Var v) const;

  bool record_;
  bool backward_done_ = false;
  std::vector<Node> nodes_;
};

// Scales every gradient by max_norm / ||g|| when the global L2 norm exceeds
// max_norm. Returns the applied scale (1 when unchanged).
template <typename T>
T clip_grad_norm(std::span<Tensor<T>* const> params, T max_norm);

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam with per-parameter first/second moments.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Tensor<T>*> params, AdamConfig config = {});

  // Throws DivergenceError if any gradient is NaN or infinite.
  void step();
  void zero_grad();
  std::int64_t steps() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<std::vector<T>>& first_moments() const { return m_; }
  const std::vector<std::vector<T>>& second_moments() const { return v_; }

 private:
  std::vector<Tensor<T>*> params_;
  AdamConfig config_;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
  std::int64_t step_ = 0;
};

}  // namespace dpcspell
