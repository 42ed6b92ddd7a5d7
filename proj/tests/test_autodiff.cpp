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

#include "dpcspell/autodiff.hpp"
#include "dpcspell/errors.hpp"
#include "gradcheck.hpp"

using namespace dpcspell;
using gradcheck::random_tensor;

TEST_CASE("forward examples") {
  Graph<double> g;
  const Var s = g.softmax(g.constant(Tensor<double>({2}, {0.0, 0.0})));
  CHECK(g.value(s)[0] == doctest::Approx(0.5));
  CHECK(g.value(s)[1] == doctest::Approx(0.5));

  const Var ln = g.layer_norm(g.constant(Tensor<double>({1, 4}, 2.5)), g.constant(Tensor<double>({4}, 1.0)),
                              g.constant(Tensor<double>({4}, 0.0)));
  for (double v : g.value(ln)) CHECK(v == doctest::Approx(0.0));

  const Var eye = g.constant(Tensor<double>({2, 2}, {1, 0, 0, 1}));
  const Var a = g.constant(Tensor<double>({2, 3}, {1, 2, 3, 4, 5, 6}));
  const auto prod = g.value(g.matmul(eye, a));
  CHECK(std::vector<double>(prod.begin(), prod.end()) == std::vector<double>{1, 2, 3, 4, 5, 6});

  const auto tr = g.value(g.transpose(a));
  CHECK(std::vector<double>(tr.begin(), tr.end()) == std::vector<double>{1, 4, 2, 5, 3, 6});
  const Var parts[] = {a, eye};
  CHECK(g.shape(g.concat(parts)) == Shape{2, 5});
  const auto sl = g.value(g.slice(a, 1, 3));
  CHECK(std::vector<double>(sl.begin(), sl.end()) == std::vector<double>{2, 3, 5, 6});
  const std::int32_t ids[] = {1, 0, 1};
  const auto emb = g.value(g.embedding(a, ids));
  CHECK(std::vector<double>(emb.begin(), emb.end()) == std::vector<double>{4, 5, 6, 1, 2, 3, 4, 5, 6});
  const auto r = g.value(g.relu(g.constant(Tensor<double>({3}, {-1, 0, 2}))));
  CHECK(std::vector<double>(r.begin(), r.end()) == std::vector<double>{0, 0, 2});
  CHECK(g.scalar(g.sum(a)) == 21.0);
}

TEST_CASE("shape errors name both shapes") {
  Graph<double> g;
  const Var a = g.constant(Tensor<double>({2, 3}));
  const Var b = g.constant(Tensor<double>({2, 3}));
  try {
    g.matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    CHECK(what.find("[2, 3]") != std::string::npos);
  }
  CHECK_THROWS_AS(g.add(a, g.constant(Tensor<double>({4}))), ShapeError);
}

TEST_CASE("cross entropy values") {
  Graph<double> g;
  const std::int32_t t1[] = {2, 0};
  const Var uni = g.cross_entropy(g.constant(Tensor<double>({2, 5}, 0.0)), t1, -1);
  CHECK(g.scalar(uni) == doctest::Approx(std::log(5.0)));
  const std::int32_t t2[] = {1};
  const Var big = g.cross_entropy(g.constant(Tensor<double>({1, 3}, {0, 1000, 0})), t2, -1);
  CHECK(g.scalar(big) == doctest::Approx(0.0).epsilon(1e-12));
  const Var hand = g.cross_entropy(g.constant(Tensor<double>({1, 2}, {0.0, std::log(3.0)})), t2, -1);
  CHECK(g.scalar(hand) == doctest::Approx(-std::log(0.75)));
  CHECK(g.scalar(hand) == doctest::Approx(0.28768).epsilon(1e-5));
  const std::int32_t pad[] = {0, 0};
  CHECK_THROWS_AS(g.cross_entropy(g.constant(Tensor<double>({2, 3}, 0.0)), pad, 0), GraphError);
  const std::int32_t some[] = {0, 2};
  CHECK(g.scalar(g.cross_entropy(g.constant(Tensor<double>({2, 3}, 0.0)), some, 0)) ==
        doctest::Approx(std::log(3.0)));
}

TEST_CASE("backward basics") {
  Tensor<double> x({1}, 2.0), y({1}, 3.0), unused({2}, 1.0);
  x.requires_grad = y.requires_grad = unused.requires_grad = true;
  Graph<double> g;
  const Var vx = g.leaf(x), vy = g.leaf(y);
  g.leaf(unused);
  const Var loss = g.sum(g.mul(vx, vy));
  g.backward(loss);
  CHECK(x.grad[0] == doctest::Approx(3.0));
  CHECK(y.grad[0] == doctest::Approx(2.0));
  for (double v : unused.grad) CHECK(v == 0.0);
  CHECK_THROWS_AS(g.backward(loss), GraphError);

  Graph<double> h;
  const Var m = h.leaf(unused);
  CHECK_THROWS_AS(h.backward(h.scale(m, 2.0)), GraphError);
  Graph<double> frozen(false);
  const Var f = frozen.sum(frozen.leaf(x));
  CHECK_THROWS_AS(frozen.backward(f), GraphError);
}

TEST_CASE("single-op gradients match finite differences") {
  Rng rng(17);
  using gradcheck::Builder;
  struct Case {
    const char* name;
    std::vector<Shape> shapes;
    Builder build;
  };
  const std::int32_t ids[] = {2, 0, 2, 1};
  const std::int32_t tg[] = {1, 3, 0};
  AttentionLayout layout;
  layout.batch = 2;
  layout.query_len = 3;
  layout.key_len = 2;
  layout.heads = 2;
  layout.allowed = {1, 0, 1, 1, 0, 0, 1, 1, 0, 1, 1, 1};
  const std::vector<Case> cases = {
      {"matmul", {{3, 4}, {4, 2}}, [](auto& g, auto& v) { return g.sum(g.mul(g.matmul(v[0], v[1]), g.matmul(v[0], v[1]))); }},
      {"add broadcast", {{3, 4}, {4}}, [](auto& g, auto& v) { return g.sum(g.relu(g.add(v[0], v[1]))); }},
      {"mul scale", {{2, 3}, {2, 3}}, [](auto& g, auto& v) { return g.sum(g.scale(g.mul(v[0], v[1]), 1.7)); }},
      {"transpose", {{2, 3}, {2, 3}}, [](auto& g, auto& v) { return g.sum(g.matmul(g.transpose(v[0]), v[1])); }},
      {"concat slice", {{2, 3}, {2, 2}}, [](auto& g, auto& v) {
         const Var p[] = {v[0], v[1]};
         const Var c = g.concat(p);
         return g.sum(g.mul(g.slice(c, 1, 4), g.slice(c, 1, 4)));
       }},
      {"embedding", {{3, 2}, {4, 2}}, [&](auto& g, auto& v) { return g.sum(g.mul(g.embedding(v[0], ids), v[1])); }},
      {"layer_norm", {{3, 5}, {5}, {5}, {3, 5}}, [](auto& g, auto& v) { return g.sum(g.mul(g.layer_norm(v[0], v[1], v[2]), v[3])); }},
      {"softmax", {{3, 4}, {3, 4}}, [](auto& g, auto& v) { return g.sum(g.mul(g.softmax(v[0]), v[1])); }},
      {"cross_entropy", {{3, 5}}, [&](auto& g, auto& v) { return g.cross_entropy(v[0], tg, 0); }},
      {"attention", {{6, 4}, {4, 4}, {4, 4}, {6, 4}}, [&](auto& g, auto& v) {
         return g.sum(g.mul(g.attention(v[0], v[1], v[2], layout), v[3]));
       }},
      {"dropout", {{4, 5}, {4, 5}}, [](auto& g, auto& v) {
         Rng fixed(99);
         return g.sum(g.mul(g.dropout(v[0], 0.3, fixed, true), v[1]));
       }},
  };
  for (const Case& c : cases) {
    std::vector<Tensor<double>> params;
    for (const Shape& s : c.shapes) params.push_back(random_tensor(rng, s));
    const double err = gradcheck::max_relative_error(params, c.build);
    CHECK_MESSAGE(err <= 1e-4, c.name << " relative error " << err);
  }
}

TEST_CASE("composite gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const double err = gradcheck::composite_case(seed);
    CHECK_MESSAGE(err <= 1e-4, "seed " << seed << " relative error " << err);
  }
}

TEST_CASE("attention details") {
  Graph<double> g;
  // all-equal keys give uniform weights
  AttentionLayout lay;
  lay.batch = 1;
  lay.query_len = 2;
  lay.key_len = 3;
  lay.heads = 1;
  const Var q = g.constant(Tensor<double>({2, 2}, {1, 2, 3, 4}));
  const Var k = g.constant(Tensor<double>({3, 2}, 0.5));
  const Var v = g.constant(Tensor<double>({3, 2}, {1, 2, 3, 4, 5, 6}));
  const Var out = g.attention(q, k, v, lay);
  for (double w : g.attention_weights(out)) CHECK(w == doctest::Approx(1.0 / 3.0));
  CHECK(g.value(out)[0] == doctest::Approx(3.0));

  // 2x2 single head by hand: softmax(q k^T / sqrt(2)) v
  Graph<double> h;
  AttentionLayout two;
  two.batch = 1;
  two.query_len = 2;
  two.key_len = 2;
  two.heads = 1;
  const std::vector<double> qv{1, 0, 0, 1}, kv{1, 1, -1, 2}, vv{1, 2, 3, 4};
  const Var o = h.attention(h.constant(Tensor<double>({2, 2}, qv)), h.constant(Tensor<double>({2, 2}, kv)),
                            h.constant(Tensor<double>({2, 2}, vv)), two);
  for (int i = 0; i < 2; ++i) {
    double s[2];
    for (int j = 0; j < 2; ++j) s[j] = (qv[i * 2] * kv[j * 2] + qv[i * 2 + 1] * kv[j * 2 + 1]) / std::sqrt(2.0);
    const double p0 = std::exp(s[0]) / (std::exp(s[0]) + std::exp(s[1]));
    for (int c = 0; c < 2; ++c) {
      CHECK(h.value(o)[i * 2 + c] == doctest::Approx(p0 * vv[c] + (1 - p0) * vv[2 + c]));
    }
  }

  // fully masked row -> zeros
  Graph<double> m;
  AttentionLayout masked = two;
  masked.allowed = {0, 0, 1, 0};
  const Var mo = m.attention(m.constant(Tensor<double>({2, 2}, qv)), m.constant(Tensor<double>({2, 2}, kv)),
                             m.constant(Tensor<double>({2, 2}, vv)), masked);
  CHECK(m.value(mo)[0] == 0.0);
  CHECK(m.value(mo)[1] == 0.0);
  CHECK(m.value(mo)[2] == doctest::Approx(1.0));
}

TEST_CASE("dropout") {
  Rng rng(1);
  Graph<double> g;
  const Var x = g.constant(Tensor<double>({100, 100}, 1.0));
  CHECK(g.dropout(x, 0.0, rng, true).id == x.id);
  CHECK(g.dropout(x, 0.5, rng, false).id == x.id);
  const auto y = g.value(g.dropout(x, 0.25, rng, true));
  std::size_t zeros = 0;
  for (double v : y) {
    if (v == 0.0) {
      ++zeros;
    } else {
      CHECK(v == doctest::Approx(1.0 / 0.75));
    }
  }
  CHECK(std::abs(static_cast<double>(zeros) / y.size() - 0.25) < 0.02);
}

TEST_CASE("clip_grad_norm") {
  Tensor<double> p({2});
  p.grad = {3.0, 4.0};
  std::vector<Tensor<double>*> ps{&p};
  CHECK(clip_grad_norm<double>(ps, 1.0) == doctest::Approx(0.2));
  CHECK(p.grad[0] == doctest::Approx(0.6));
  CHECK(p.grad[1] == doctest::Approx(0.8));
  CHECK(clip_grad_norm<double>(ps, 5.0) == 1.0);
  CHECK(p.grad[0] == doctest::Approx(0.6));
  p.grad = {0.0, 0.0};
  CHECK(clip_grad_norm<double>(ps, 1.0) == 1.0);
  CHECK(p.grad == std::vector<double>{0.0, 0.0});
}

TEST_CASE("adam") {
  Tensor<double> p({1}, 1.0);
  p.grad = {0.3};
  Adam<double> opt({&p});
  opt.step();
  // bias-corrected first step moves by lr * g / (|g| + eps')
  CHECK(p.values[0] == doctest::Approx(1.0 - 5e-4).epsilon(1e-9));
  CHECK(opt.steps() == 1);
  const double m = opt.first_moments()[0][0], v = opt.second_moments()[0][0];
  p.grad = {0.0};
  const double before = p.values[0];
  opt.step();
  CHECK(opt.first_moments()[0][0] == doctest::Approx(0.9 * m));
  CHECK(opt.second_moments()[0][0] == doctest::Approx(0.999 * v));
  CHECK(p.values[0] < before);  // momentum still carries it
  Tensor<double> q({1}, 1.0);
  q.grad = {0.0};
  Adam<double> fresh({&q});
  fresh.step();
  CHECK(q.values[0] == 1.0);
  q.grad = {std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(fresh.step(), DivergenceError);
}

TEST_CASE("training is deterministic") {
  auto run = [] {
    Rng rng(5);
    Tensor<double> w = random_tensor(rng, {3, 2});
    Tensor<double> x = random_tensor(rng, {4, 3});
    w.requires_grad = true;
    Adam<double> opt({&w});
    const std::int32_t t[] = {0, 1, 1, 0};
    for (int step = 0; step < 20; ++step) {
      opt.zero_grad();
      Graph<double> g;
      Rng drop(step);
      const Var logits = g.matmul(g.dropout(g.constant(x), 0.1, drop, true), g.leaf(w));
      g.backward(g.cross_entropy(logits, t, -1));
      opt.step();
    }
    return w.values;
  };
  CHECK(run() == run());
}
