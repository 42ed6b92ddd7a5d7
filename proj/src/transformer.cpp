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

#include "dpcspell/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpcspell/errors.hpp"

namespace dpcspell {

TransformerConfig TransformerConfig::reduced() {
  TransformerConfig c;
  c.num_layers = 2;
  c.num_heads = 4;
  c.hidden_dim = 64;
  c.pf_dim = 128;
  return c;
}

void TransformerConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw DataError("transformer config: " + what);
  };
  if (num_layers < 1) fail("num_layers must be positive");
  if (num_heads < 1) fail("num_heads must be positive");
  if (hidden_dim < 1 || hidden_dim % num_heads != 0) {
    fail("hidden_dim " + std::to_string(hidden_dim) +
         " is not divisible by num_heads " + std::to_string(num_heads));
  }
  if (pf_dim < 1) fail("pf_dim must be positive");
  if (dropout < 0.0 || dropout >= 1.0) fail("dropout must be in [0, 1)");
  if (max_seq_len < 3) fail("max_seq_len must be at least 3");
  if (vocab_size <= Vocab::kNumSpecials) {
    fail("vocab_size must exceed the 6 special tokens");
  }
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(grad_clip > 0.0)) fail("grad_clip must be positive");
  if (epochs < 0) fail("epochs must be non-negative");
}

TokenBatch TokenBatch::pack(std::span<const std::vector<TokenId>> rows) {
  TokenBatch b;
  b.batch = static_cast<int>(rows.size());
  for (const auto& r : rows) b.length = std::max(b.length, static_cast<int>(r.size()));
  b.ids.assign(static_cast<std::size_t>(b.batch) * b.length, Vocab::kPad);
  for (int i = 0; i < b.batch; ++i) {
    std::copy(rows[i].begin(), rows[i].end(),
              b.ids.begin() + static_cast<std::size_t>(i) * b.length);
  }
  return b;
}

AttentionLayout padding_layout(const TokenBatch& queries,
                               const TokenBatch& keys, int heads) {
  AttentionLayout l;
  l.batch = queries.batch;
  l.query_len = queries.length;
  l.key_len = keys.length;
  l.heads = heads;
  l.allowed.resize(static_cast<std::size_t>(l.batch) * l.query_len * l.key_len);
  std::size_t p = 0;
  for (int b = 0; b < l.batch; ++b) {
    for (int i = 0; i < l.query_len; ++i) {
      for (int j = 0; j < l.key_len; ++j) l.allowed[p++] = !keys.is_pad(b, j);
    }
  }
  return l;
}

AttentionLayout causal_layout(const TokenBatch& tgt, int heads) {
  AttentionLayout l;
  l.batch = tgt.batch;
  l.query_len = tgt.length;
  l.key_len = tgt.length;
  l.heads = heads;
  l.allowed.resize(static_cast<std::size_t>(l.batch) * l.query_len * l.key_len);
  std::size_t p = 0;
  for (int b = 0; b < l.batch; ++b) {
    for (int i = 0; i < l.query_len; ++i) {
      for (int j = 0; j < l.key_len; ++j) {
        l.allowed[p++] = j <= i && !tgt.is_pad(b, j);
      }
    }
  }
  return l;
}

std::vector<TokenId> wrap_source(std::span<const TokenId> content) {
  std::vector<TokenId> out;
  out.reserve(content.size() + 2);
  out.push_back(Vocab::kSos);
  out.insert(out.end(), content.begin(), content.end());
  out.push_back(Vocab::kEos);
  return out;
}

// ---- model ---------------------------------------------------------------

template <typename T>
BasicSeq2Seq<T>::BasicSeq2Seq(TransformerConfig config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  const int H = config_.hidden_dim;
  const int V = config_.vocab_size;
  const int L = config_.max_seq_len;
  enc_tok_ = add_param("enc.tok", {V, H});
  enc_pos_ = add_param("enc.pos", {L, H});
  for (int l = 0; l < config_.num_layers; ++l) {
    const std::string p = "enc." + std::to_string(l) + ".";
    EncoderLayer layer;
    layer.self = add_attention(p + "self");
    layer.norm1 = add_norm(p + "norm1");
    layer.ff = add_ff(p + "ff");
    layer.norm2 = add_norm(p + "norm2");
    encoder_.push_back(layer);
  }
  dec_tok_ = add_param("dec.tok", {V, H});
  dec_pos_ = add_param("dec.pos", {L, H});
  for (int l = 0; l < config_.num_layers; ++l) {
    const std::string p = "dec." + std::to_string(l) + ".";
    DecoderLayer layer;
    layer.self = add_attention(p + "self");
    layer.norm1 = add_norm(p + "norm1");
    layer.cross = add_attention(p + "cross");
    layer.norm2 = add_norm(p + "norm2");
    layer.ff = add_ff(p + "ff");
    layer.norm3 = add_norm(p + "norm3");
    decoder_.push_back(layer);
  }
  out_w_ = add_param("out.w", {H, V});
  out_b_ = add_param("out.b", {V});

  Rng rng(seed);
  for (NamedParam<T>& p : params_) {
    Tensor<T>& t = p.tensor;
    t.requires_grad = true;
    const bool is_gamma = p.name.size() > 2 &&
                          p.name.compare(p.name.size() - 2, 2, ".g") == 0;
    if (is_gamma) {
      std::fill(t.values.begin(), t.values.end(), T(1));
    } else if (t.shape.size() == 2) {
      const double a = std::sqrt(6.0 / (t.shape[0] + t.shape[1]));
      for (T& v : t.values) v = static_cast<T>((rng.uniform01() * 2.0 - 1.0) * a);
    }
  }
}

template <typename T>
int BasicSeq2Seq<T>::add_param(const std::string& name, Shape shape) {
  params_.push_back({name, Tensor<T>(std::move(shape))});
  const int idx = static_cast<int>(params_.size() - 1);
  index_[name] = idx;
  return idx;
}

template <typename T>
typename BasicSeq2Seq<T>::AttentionBlock BasicSeq2Seq<T>::add_attention(
    const std::string& prefix) {
  const int H = config_.hidden_dim;
  AttentionBlock b;
  b.wq = add_param(prefix + ".wq", {H, H});
  b.bq = add_param(prefix + ".bq", {H});
  b.wk = add_param(prefix + ".wk", {H, H});
  b.bk = add_param(prefix + ".bk", {H});
  b.wv = add_param(prefix + ".wv", {H, H});
  b.bv = add_param(prefix + ".bv", {H});
  b.wo = add_param(prefix + ".wo", {H, H});
  b.bo = add_param(prefix + ".bo", {H});
  return b;
}

template <typename T>
typename BasicSeq2Seq<T>::NormBlock BasicSeq2Seq<T>::add_norm(
    const std::string& prefix) {
  const int H = config_.hidden_dim;
  NormBlock b;
  b.gamma = add_param(prefix + ".g", {H});
  b.beta = add_param(prefix + ".b", {H});
  return b;
}

template <typename T>
typename BasicSeq2Seq<T>::FeedForwardBlock BasicSeq2Seq<T>::add_ff(
    const std::string& prefix) {
  const int H = config_.hidden_dim;
  const int P = config_.pf_dim;
  FeedForwardBlock b;
  b.w1 = add_param(prefix + ".w1", {H, P});
  b.b1 = add_param(prefix + ".b1", {P});
  b.w2 = add_param(prefix + ".w2", {P, H});
  b.b2 = add_param(prefix + ".b2", {H});
  return b;
}

template <typename T>
std::size_t BasicSeq2Seq<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

template <typename T>
std::vector<Tensor<T>*> BasicSeq2Seq<T>::parameter_tensors() {
  std::vector<Tensor<T>*> out;
  for (auto& p : params_) out.push_back(&p.tensor);
  return out;
}

template <typename T>
Tensor<T>* BasicSeq2Seq<T>::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second].tensor;
}

template <typename T>
const Tensor<T>* BasicSeq2Seq<T>::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second].tensor;
}

// ---- forward -------------------------------------------------------------

template <typename T>
ForwardPass<T>::ForwardPass(BasicSeq2Seq<T>& model, bool train, Rng* rng)
    : model_(model), graph_(true), train_(train), rng_(rng) {
  if (train_ && rng_ == nullptr && model.config().dropout > 0.0) {
    throw GraphError("training pass with dropout needs a generator");
  }
  for (auto& p : model.parameters()) vars_.push_back(graph_.leaf(p.tensor));
}

template <typename T>
ForwardPass<T>::ForwardPass(const BasicSeq2Seq<T>& model)
    : model_(model), graph_(false), train_(false), rng_(nullptr) {
  for (const auto& p : model.parameters()) vars_.push_back(graph_.view(p.tensor));
}

template <typename T>
Var ForwardPass<T>::drop(Var x) {
  if (!train_) return x;
  return graph_.dropout(x, static_cast<T>(model_.config().dropout), *rng_, true);
}

template <typename T>
Var ForwardPass<T>::embed_with_position(const TokenBatch& ids,
                                        bool decoder_side) {
  if (ids.length > model_.config().max_seq_len) {
    throw InputTooLongError("sequence of " + std::to_string(ids.length) +
                            " tokens exceeds max_seq_len " +
                            std::to_string(model_.config().max_seq_len));
  }
  std::vector<TokenId> positions(ids.ids.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    positions[i] = static_cast<TokenId>(i % std::max(ids.length, 1));
  }
  const int tok = decoder_side ? model_.dec_token() : model_.enc_token();
  const int pos = decoder_side ? model_.dec_position() : model_.enc_position();
  Var x = graph_.add(graph_.embedding(param(tok), ids.ids),
                     graph_.embedding(param(pos), positions));
  return drop(x);
}

template <typename T>
Var ForwardPass<T>::multi_head_attention(
    const typename BasicSeq2Seq<T>::AttentionBlock& b, Var query_in,
    Var key_value_in, const AttentionLayout& layout) {
  Graph<T>& g = graph_;
  Var q = g.add(g.matmul(query_in, param(b.wq)), param(b.bq));
  Var k = g.add(g.matmul(key_value_in, param(b.wk)), param(b.bk));
  Var v = g.add(g.matmul(key_value_in, param(b.wv)), param(b.bv));
  Var heads = g.attention(q, k, v, layout);
  attention_nodes_.push_back(heads);
  return g.add(g.matmul(heads, param(b.wo)), param(b.bo));
}

template <typename T>
Var ForwardPass<T>::norm(Var x,
                         const typename BasicSeq2Seq<T>::NormBlock& block) {
  return graph_.layer_norm(x, param(block.gamma), param(block.beta));
}

template <typename T>
Var ForwardPass<T>::feed_forward(
    Var x, const typename BasicSeq2Seq<T>::FeedForwardBlock& b) {
  Graph<T>& g = graph_;
  Var h = g.relu(g.add(g.matmul(x, param(b.w1)), param(b.b1)));
  h = drop(h);
  return g.add(g.matmul(h, param(b.w2)), param(b.b2));
}

template <typename T>
Var ForwardPass<T>::encode(const TokenBatch& src) {
  Graph<T>& g = graph_;
  const int heads = model_.config().num_heads;
  Var x = embed_with_position(src, false);
  const AttentionLayout layout = padding_layout(src, src, heads);
  for (const auto& layer : model_.encoder_layers()) {
    Var a = multi_head_attention(layer.self, x, x, layout);
    x = norm(g.add(x, drop(a)), layer.norm1);
    Var f = feed_forward(x, layer.ff);
    x = norm(g.add(x, drop(f)), layer.norm2);
  }
  return x;
}

template <typename T>
Var ForwardPass<T>::decoder_states(const TokenBatch& tgt, Var memory,
                                   const TokenBatch& src) {
  Graph<T>& g = graph_;
  const int heads = model_.config().num_heads;
  Var y = embed_with_position(tgt, true);
  const AttentionLayout self_layout = causal_layout(tgt, heads);
  const AttentionLayout cross_layout = padding_layout(tgt, src, heads);
  for (const auto& layer : model_.decoder_layers()) {
    Var a = multi_head_attention(layer.self, y, y, self_layout);
    y = norm(g.add(y, drop(a)), layer.norm1);
    Var c = multi_head_attention(layer.cross, y, memory, cross_layout);
    y = norm(g.add(y, drop(c)), layer.norm2);
    Var f = feed_forward(y, layer.ff);
    y = norm(g.add(y, drop(f)), layer.norm3);
  }
  return y;
}

template <typename T>
Var ForwardPass<T>::project(Var states) {
  return graph_.add(graph_.matmul(states, param(model_.out_weight())),
                    param(model_.out_bias()));
}

template <typename T>
Var ForwardPass<T>::decode(const TokenBatch& tgt, Var memory,
                           const TokenBatch& src) {
  return project(decoder_states(tgt, memory, src));
}

template <typename T>
Var seq2seq_loss(ForwardPass<T>& pass,
                 std::span<const std::vector<TokenId>> sources,
                 std::span<const std::vector<TokenId>> targets) {
  if (sources.size() != targets.size() || sources.empty()) {
    throw ShapeError("seq2seq_loss: " + std::to_string(sources.size()) +
                     " sources vs " + std::to_string(targets.size()) +
                     " targets");
  }
  std::vector<std::vector<TokenId>> enc_in;
  std::vector<std::vector<TokenId>> dec_in;
  std::vector<std::vector<TokenId>> labels;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    enc_in.push_back(wrap_source(sources[i]));
    std::vector<TokenId> d{Vocab::kSos};
    d.insert(d.end(), targets[i].begin(), targets[i].end());
    dec_in.push_back(std::move(d));
    std::vector<TokenId> l(targets[i].begin(), targets[i].end());
    l.push_back(Vocab::kEos);
    labels.push_back(std::move(l));
  }
  const TokenBatch src = TokenBatch::pack(enc_in);
  const TokenBatch tgt = TokenBatch::pack(dec_in);
  const TokenBatch lab = TokenBatch::pack(labels);
  Var memory = pass.encode(src);
  Var logits = pass.decode(tgt, memory, src);
  return pass.graph().cross_entropy(logits, lab.ids, Vocab::kPad);
}

template <typename T>
std::vector<T> decoder_logits(const BasicSeq2Seq<T>& model,
                              std::span<const TokenId> src,
                              std::span<const TokenId> tgt) {
  ForwardPass<T> pass(model);
  const std::vector<std::vector<TokenId>> s{wrap_source(src)};
  std::vector<TokenId> d{Vocab::kSos};
  d.insert(d.end(), tgt.begin(), tgt.end());
  const std::vector<std::vector<TokenId>> t{d};
  const TokenBatch sb = TokenBatch::pack(s);
  const TokenBatch tb = TokenBatch::pack(t);
  Var memory = pass.encode(sb);
  Var logits = pass.decode(tb, memory, sb);
  auto v = pass.graph().value(logits);
  return {v.begin(), v.end()};
}

// ---- decoding ------------------------------------------------------------

namespace {

template <typename T>
void log_softmax(const T* logits, int n, std::vector<double>& out) {
  out.resize(n);
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) mx = std::max(mx, static_cast<double>(logits[i]));
  double se = 0.0;
  for (int i = 0; i < n; ++i) se += std::exp(static_cast<double>(logits[i]) - mx);
  const double lse = mx + std::log(se);
  for (int i = 0; i < n; ++i) out[i] = static_cast<double>(logits[i]) - lse;
}

int clamp_steps(int max_len, int max_seq_len) {
  return std::max(0, std::min(max_len, max_seq_len));
}

void check_source(std::size_t content_len, int max_seq_len) {
  if (content_len + 2 > static_cast<std::size_t>(max_seq_len)) {
    throw InputTooLongError("input of " + std::to_string(content_len) +
                            " tokens does not fit max_seq_len " +
                            std::to_string(max_seq_len));
  }
}

// Logits of the last position of every row of `prefixes`.
template <typename T>
std::vector<T> last_logits(ForwardPass<T>& pass, Var memory,
                           const TokenBatch& src,
                           const std::vector<std::vector<TokenId>>& prefixes) {
  const TokenBatch tgt = TokenBatch::pack(prefixes);
  Var states = pass.decoder_states(tgt, memory, src);
  std::vector<TokenId> rows(tgt.batch);
  for (int b = 0; b < tgt.batch; ++b) rows[b] = b * tgt.length + tgt.length - 1;
  Var last = pass.graph().embedding(states, rows);
  auto v = pass.graph().value(pass.project(last));
  return {v.begin(), v.end()};
}

}  // namespace

template <typename T>
std::vector<std::vector<TokenId>> greedy_decode_batch(
    const BasicSeq2Seq<T>& model,
    std::span<const std::vector<TokenId>> sources, int max_len) {
  const TransformerConfig& cfg = model.config();
  std::vector<std::vector<TokenId>> out(sources.size());
  const int steps = clamp_steps(max_len, cfg.max_seq_len);
  if (sources.empty() || steps == 0) return out;
  std::vector<std::vector<TokenId>> enc_in;
  for (const auto& s : sources) {
    check_source(s.size(), cfg.max_seq_len);
    enc_in.push_back(wrap_source(s));
  }
  ForwardPass<T> pass(model);
  const TokenBatch src = TokenBatch::pack(enc_in);
  Var memory = pass.encode(src);
  std::vector<std::vector<TokenId>> prefixes(sources.size(),
                                             std::vector<TokenId>{Vocab::kSos});
  std::vector<bool> done(sources.size(), false);
  std::vector<double> lp;
  const int V = cfg.vocab_size;
  for (int step = 0; step < steps; ++step) {
    const std::vector<T> logits = last_logits(pass, memory, src, prefixes);
    bool all_done = true;
    for (std::size_t b = 0; b < sources.size(); ++b) {
      if (done[b]) continue;
      log_softmax(logits.data() + b * V, V, lp);
      int best = 0;
      for (int v = 1; v < V; ++v) {
        if (lp[v] > lp[best]) best = v;
      }
      if (best == Vocab::kEos) {
        done[b] = true;
        continue;
      }
      out[b].push_back(best);
      prefixes[b].push_back(best);
      all_done = false;
    }
    if (all_done) break;
    // Finished rows keep decoding padding so every prefix has one length.
    for (std::size_t b = 0; b < sources.size(); ++b) {
      if (done[b]) prefixes[b].push_back(Vocab::kPad);
    }
  }
  return out;
}

template <typename T>
std::vector<TokenId> greedy_decode(const BasicSeq2Seq<T>& model,
                                   std::span<const TokenId> src, int max_len) {
  const std::vector<std::vector<TokenId>> one{
      std::vector<TokenId>(src.begin(), src.end())};
  return greedy_decode_batch(model, std::span(one), max_len)[0];
}

template <typename T>
std::vector<BeamHypothesis> beam_decode(const BasicSeq2Seq<T>& model,
                                        std::span<const TokenId> src,
                                        int beam, int max_len) {
  if (beam < 1) throw DataError("beam width must be at least 1");
  const TransformerConfig& cfg = model.config();
  check_source(src.size(), cfg.max_seq_len);
  const int steps = clamp_steps(max_len, cfg.max_seq_len);
  const int V = cfg.vocab_size;

  ForwardPass<T> pass(model);
  const std::vector<std::vector<TokenId>> enc_in{wrap_source(src)};
  const TokenBatch src_one = TokenBatch::pack(enc_in);
  Var memory_one = pass.encode(src_one);

  struct Active {
    std::vector<TokenId> ids;
    double log_prob;
  };
  std::vector<Active> active{{{}, 0.0}};
  std::vector<BeamHypothesis> finished;
  std::vector<double> lp;

  for (int step = 0; step < steps && !active.empty(); ++step) {
    const int nb = static_cast<int>(active.size());
    std::vector<std::vector<TokenId>> srcs(nb, enc_in[0]);
    const TokenBatch src_batch = TokenBatch::pack(srcs);
    std::vector<TokenId> mem_rows(static_cast<std::size_t>(nb) * src_one.length);
    for (std::size_t i = 0; i < mem_rows.size(); ++i) {
      mem_rows[i] = static_cast<TokenId>(i % src_one.length);
    }
    Var memory = pass.graph().embedding(memory_one, mem_rows);
    std::vector<std::vector<TokenId>> prefixes;
    for (const Active& a : active) {
      std::vector<TokenId> p{Vocab::kSos};
      p.insert(p.end(), a.ids.begin(), a.ids.end());
      prefixes.push_back(std::move(p));
    }
    const std::vector<T> logits = last_logits(pass, memory, src_batch, prefixes);

    struct Cand {
      double total;
      double step_lp;
      TokenId token;
      int hyp;
    };
    std::vector<Cand> cands;
    cands.reserve(static_cast<std::size_t>(nb) * V);
    for (int h = 0; h < nb; ++h) {
      log_softmax(logits.data() + static_cast<std::size_t>(h) * V, V, lp);
      for (int v = 0; v < V; ++v) {
        cands.push_back({active[h].log_prob + lp[v], lp[v], v, h});
      }
    }
    const std::size_t keep = std::min<std::size_t>(beam, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(),
                      [](const Cand& a, const Cand& b) {
                        if (a.total != b.total) return a.total > b.total;
                        if (a.step_lp != b.step_lp) return a.step_lp > b.step_lp;
                        if (a.token != b.token) return a.token < b.token;
                        return a.hyp < b.hyp;
                      });
    std::vector<Active> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const Cand& cd = cands[c];
      if (cd.token == Vocab::kEos) {
        BeamHypothesis h;
        h.ids = active[cd.hyp].ids;
        h.log_prob = cd.total;
        h.score = cd.total / static_cast<double>(h.ids.size() + 1);
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        Active a{active[cd.hyp].ids, cd.total};
        a.ids.push_back(cd.token);
        next.push_back(std::move(a));
      }
    }
    active = std::move(next);
    if (static_cast<int>(finished.size()) >= beam) {
      active.clear();
    }
  }
  for (const Active& a : active) {
    BeamHypothesis h;
    h.ids = a.ids;
    h.log_prob = a.log_prob;
    h.score = a.ids.empty() ? 0.0 : a.log_prob / static_cast<double>(a.ids.size());
    finished.push_back(std::move(h));
  }
  if (finished.empty()) finished.push_back(BeamHypothesis{});
  std::stable_sort(finished.begin(), finished.end(),
                   [](const BeamHypothesis& a, const BeamHypothesis& b) {
                     return a.score > b.score;
                   });
  if (static_cast<int>(finished.size()) > beam) finished.resize(beam);
  return finished;
}

#define DPCSPELL_INSTANTIATE(T)                                                \
  template class BasicSeq2Seq<T>;                                              \
  template class ForwardPass<T>;                                               \
  template Var seq2seq_loss<T>(ForwardPass<T>&,                                \
                               std::span<const std::vector<TokenId>>,          \
                               std::span<const std::vector<TokenId>>);         \
  template std::vector<T> decoder_logits<T>(const BasicSeq2Seq<T>&,            \
                                            std::span<const TokenId>,          \
                                            std::span<const TokenId>);         \
  template std::vector<TokenId> greedy_decode<T>(const BasicSeq2Seq<T>&,       \
                                                 std::span<const TokenId>, int); \
  template std::vector<std::vector<TokenId>> greedy_decode_batch<T>(           \
      const BasicSeq2Seq<T>&, std::span<const std::vector<TokenId>>, int);     \
  template std::vector<BeamHypothesis> beam_decode<T>(                         \
      const BasicSeq2Seq<T>&, std::span<const TokenId>, int, int);

DPCSPELL_INSTANTIATE(float)
DPCSPELL_INSTANTIATE(double)

#undef DPCSPELL_INSTANTIATE

}  // namespace dpcspell
