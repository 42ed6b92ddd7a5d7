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

#include <algorithm>
#include <cmath>
#include <set>

#include "dpcspell/errors.hpp"
#include "dpcspell/transformer.hpp"

using namespace dpcspell;

namespace {

TransformerConfig tiny(int vocab = 10) {
  TransformerConfig c;
  c.num_layers = 1;
  c.num_heads = 2;
  c.hidden_dim = 8;
  c.pf_dim = 16;
  c.dropout = 0.0;
  c.max_seq_len = 12;
  c.vocab_size = vocab;
  return c;
}

std::size_t expected_count(const TransformerConfig& c) {
  const std::size_t H = c.hidden_dim, P = c.pf_dim, V = c.vocab_size, L = c.max_seq_len;
  const std::size_t attn = 4 * (H * H + H), norm = 2 * H, ff = H * P + P + P * H + H;
  const std::size_t enc = attn + 2 * norm + ff;
  const std::size_t dec = 2 * attn + 3 * norm + ff;
  return 2 * (V * H + L * H) + c.num_layers * (enc + dec) + H * V + V;
}

std::vector<TokenId> ids(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("parameter inventory") {
  for (const TransformerConfig& c : {tiny(), TransformerConfig::reduced(), [] {
         TransformerConfig d;
         d.vocab_size = 40;
         return d;
       }()}) {
    TransformerConfig cfg = c;
    if (cfg.vocab_size == 0) cfg.vocab_size = 33;
    const Seq2SeqModel m(cfg, 1);
    CHECK(m.parameter_count() == expected_count(cfg));
    std::set<std::string> names;
    for (const auto& p : m.parameters()) names.insert(p.name);
    CHECK(names.size() == m.parameters().size());
  }
  const Seq2SeqModel a(tiny(), 3), b(tiny(), 3), c(tiny(), 4);
  CHECK(a.parameters()[0].tensor.values == b.parameters()[0].tensor.values);
  CHECK(a.parameters()[0].tensor.values != c.parameters()[0].tensor.values);
  // biases start at zero, norms at identity
  for (const auto& p : a.parameters()) {
    if (p.name.ends_with(".g")) {
      for (float v : p.tensor.values) CHECK(v == 1.0f);
    }
    if (p.name.ends_with(".bq") || p.name == "out.b") {
      for (float v : p.tensor.values) CHECK(v == 0.0f);
    }
  }
  TransformerConfig bad = tiny();
  bad.num_heads = 3;
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("forward shapes") {
  const Seq2SeqModel m(tiny(), 2);
  ForwardPass<float> pass(m);
  const std::vector<std::vector<TokenId>> src{ids({1, 6, 7, 2}), ids({1, 8, 2})};
  const std::vector<std::vector<TokenId>> tgt{ids({1, 6}), ids({1, 9, 9})};
  const TokenBatch s = TokenBatch::pack(src), t = TokenBatch::pack(tgt);
  CHECK(s.length == 4);
  CHECK(s.is_pad(1, 3));
  const Var mem = pass.encode(s);
  CHECK(pass.graph().shape(mem) == Shape{8, 8});
  const Var logits = pass.decode(t, mem, s);
  CHECK(pass.graph().shape(logits) == Shape{6, 10});
}

TEST_CASE("decoder is causal") {
  const Seq2SeqModel m(tiny(), 5);
  const auto src = ids({6, 7, 8});
  const auto a = decoder_logits(m, src, ids({6, 7, 8, 9}));
  const auto b = decoder_logits(m, src, ids({6, 7, 3, 3}));
  // rows 0..2 see SOS,6,7 only
  for (int i = 0; i < 3 * 10; ++i) CHECK(a[i] == b[i]);
  bool differs = false;
  for (int i = 3 * 10; i < 5 * 10; ++i) differs |= a[i] != b[i];
  CHECK(differs);
}

TEST_CASE("attention rows are distributions") {
  const Seq2SeqModel m(tiny(), 6);
  ForwardPass<float> pass(m);
  const std::vector<std::vector<TokenId>> src{ids({1, 6, 7, 8, 2}), ids({1, 9, 2})};
  const std::vector<std::vector<TokenId>> tgt{ids({1, 6, 7}), ids({1, 9})};
  const TokenBatch s = TokenBatch::pack(src), t = TokenBatch::pack(tgt);
  pass.decode(t, pass.encode(s), s);
  REQUIRE(pass.attention_nodes().size() == 3);
  // encoder self, decoder self, cross
  const int key_lens[] = {5, 3, 5};
  for (int n = 0; n < 3; ++n) {
    const auto w = pass.graph().attention_weights(pass.attention_nodes()[n]);
    const int keys = key_lens[n];
    REQUIRE(w.size() % keys == 0);
    for (std::size_t r = 0; r < w.size(); r += keys) {
      double total = 0.0;
      for (int k = 0; k < keys; ++k) {
        CHECK(w[r + k] >= 0.0f);
        total += w[r + k];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
}

TEST_CASE("padding does not leak into real positions") {
  const Seq2SeqModel m(tiny(), 7);
  const auto alone = decoder_logits(m, ids({6, 7}), ids({8}));
  ForwardPass<float> pass(m);
  const std::vector<std::vector<TokenId>> src{wrap_source(ids({6, 7})), wrap_source(ids({9, 9, 9, 9, 9}))};
  const std::vector<std::vector<TokenId>> tgt{ids({1, 8}), ids({1, 8, 8, 8})};
  const TokenBatch s = TokenBatch::pack(src), t = TokenBatch::pack(tgt);
  const auto batched = pass.graph().value(pass.decode(t, pass.encode(s), s));
  for (int i = 0; i < 2 * 10; ++i) CHECK(batched[i] == doctest::Approx(alone[i]).epsilon(1e-5));
}

TEST_CASE("decoding") {
  TransformerConfig c = tiny();
  c.max_seq_len = 16;
  const Seq2SeqModel m(c, 11);
  const std::vector<std::vector<TokenId>> srcs{ids({6}), ids({6, 7, 8, 9}), ids({9, 8}), ids({7, 7, 7, 7, 7, 7})};
  const auto batch = greedy_decode_batch(m, srcs, 8);
  for (std::size_t i = 0; i < srcs.size(); ++i) {
    const auto single = greedy_decode(m, srcs[i], 8);
    CHECK(batch[i] == single);
    CHECK(single.size() <= 8);
    const auto beam1 = beam_decode(m, srcs[i], 1, 8);
    REQUIRE(beam1.size() == 1);
    CHECK(beam1[0].ids == single);
    const auto beams = beam_decode(m, srcs[i], 4, 8);
    REQUIRE(!beams.empty());
    for (std::size_t k = 1; k < beams.size(); ++k) CHECK(beams[k - 1].score >= beams[k].score);
    for (const auto& h : beams) {
      CHECK(h.log_prob <= 0.0);
      CHECK(std::isfinite(h.score));
    }
  }
  CHECK(greedy_decode(m, ids({6, 7}), 0).empty());
  CHECK_THROWS_AS(greedy_decode(m, std::vector<TokenId>(15, 6), 4), InputTooLongError);
  CHECK_NOTHROW(greedy_decode(m, std::vector<TokenId>(14, 6), 4));
}

TEST_CASE("greedy follows the argmax of the logits") {
  const Seq2SeqModel m(tiny(), 13);
  const auto src = ids({6, 8, 7});
  const auto out = greedy_decode(m, src, 6);
  std::vector<TokenId> prefix;
  for (std::size_t step = 0; step <= out.size() && step < 6; ++step) {
    const auto logits = decoder_logits(m, src, prefix);
    const float* last = logits.data() + prefix.size() * 10;
    int best = 0;
    for (int v = 1; v < 10; ++v) {
      if (last[v] > last[best]) best = v;
    }
    if (step == out.size()) {
      CHECK(best == Vocab::kEos);
      break;
    }
    CHECK(best == out[step]);
    prefix.push_back(out[step]);
  }
}

TEST_CASE("model gradients match finite differences") {
  TransformerConfig c = tiny(9);
  c.hidden_dim = 4;
  c.pf_dim = 6;
  c.max_seq_len = 8;
  BasicSeq2Seq<double> m(c, 21);
  const std::vector<std::vector<TokenId>> src{ids({6, 7, 8}), ids({8})};
  const std::vector<std::vector<TokenId>> tgt{ids({6, 4, 8}), ids({7, 7})};
  for (auto* t : m.parameter_tensors()) t->grad.assign(t->values.size(), 0.0);
  {
    ForwardPass<double> pass(m, true, nullptr);
    pass.graph().backward(seq2seq_loss(pass, src, tgt));
  }
  auto loss = [&] {
    ForwardPass<double> pass(std::as_const(m));
    return pass.graph().scalar(seq2seq_loss(pass, src, tgt));
  };
  double worst = 0.0;
  for (auto& p : m.parameters()) {
    auto& t = p.tensor;
    for (std::size_t i = 0; i < t.values.size(); i += 1 + t.values.size() / 5) {
      const double keep = t.values[i];
      t.values[i] = keep + 1e-6;
      const double up = loss();
      t.values[i] = keep - 1e-6;
      const double down = loss();
      t.values[i] = keep;
      const double numeric = (up - down) / 2e-6;
      const double err = std::abs(t.grad[i] - numeric) / std::max({std::abs(t.grad[i]), std::abs(numeric), 1e-5});
      CHECK_MESSAGE(err <= 1e-4, p.name << "[" << i << "] " << t.grad[i] << " vs " << numeric);
      worst = std::max(worst, err);
    }
  }
  CHECK(worst <= 1e-4);
}
