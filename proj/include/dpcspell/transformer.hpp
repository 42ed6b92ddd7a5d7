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
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpcspell/autodiff.hpp"
#include "dpcspell/charlex.hpp"
#include "dpcspell/rng.hpp"

namespace dpcspell {

struct TransformerConfig {
  int num_layers = 5;
  int num_heads = 8;
  int hidden_dim = 128;
  int pf_dim = 256;
  double dropout = 0.10;
  int max_seq_len = 96;
  int vocab_size = 0;
  double learning_rate = 5e-4;
  double grad_clip = 1.0;
  int epochs = 100;

  // 2 layers, 4 heads, hidden 64, pf 128; the desk-scale setting.
  static TransformerConfig reduced();

  // Throws DataError when the sizes are inconsistent.
  void validate() const;

  bool operator==(const TransformerConfig&) const = default;
};

// Padded id matrix, batch x length, row-major. Short rows are filled with
// PAD.
struct TokenBatch {
  int batch = 0;
  int length = 0;
  std::vector<TokenId> ids;

  static TokenBatch pack(std::span<const std::vector<TokenId>> rows);
  TokenId at(int b, int t) const {
    return ids[static_cast<std::size_t>(b) * length + t];
  }
  bool is_pad(int b, int t) const { return at(b, t) == Vocab::kPad; }
};

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
class ForwardPass;

// Character-level encoder-decoder transformer: learned token and position
// embeddings, post-norm residual blocks, ReLU feed-forward, and a linear
// output projection. Detector, purificator and corrector all use this shape.
template <typename T>
class BasicSeq2Seq {
 public:
  // Xavier-uniform weights drawn from `seed`; biases zero, norms identity.
  BasicSeq2Seq(TransformerConfig config, std::uint64_t seed);

  const TransformerConfig& config() const { return config_; }
  std::size_t parameter_count() const;

  std::deque<NamedParam<T>>& parameters() { return params_; }
  const std::deque<NamedParam<T>>& parameters() const { return params_; }
  std::vector<Tensor<T>*> parameter_tensors();
  // nullptr when absent.
  Tensor<T>* find(const std::string& name);
  const Tensor<T>* find(const std::string& name) const;

  struct AttentionBlock {
    int wq, bq, wk, bk, wv, bv, wo, bo;
  };
  struct NormBlock {
    int gamma, beta;
  };
  struct FeedForwardBlock {
    int w1, b1, w2, b2;
  };
  struct EncoderLayer {
    AttentionBlock self;
    NormBlock norm1;
    FeedForwardBlock ff;
    NormBlock norm2;
  };
  struct DecoderLayer {
    AttentionBlock self;
    NormBlock norm1;
    AttentionBlock cross;
    NormBlock norm2;
    FeedForwardBlock ff;
    NormBlock norm3;
  };

  const std::vector<EncoderLayer>& encoder_layers() const { return encoder_; }
  const std::vector<DecoderLayer>& decoder_layers() const { return decoder_; }
  int enc_token() const { return enc_tok_; }
  int enc_position() const { return enc_pos_; }
  int dec_token() const { return dec_tok_; }
  int dec_position() const { return dec_pos_; }
  int out_weight() const { return out_w_; }
  int out_bias() const { return out_b_; }

 private:
  int add_param(const std::string& name, Shape shape);
  AttentionBlock add_attention(const std::string& prefix);
  NormBlock add_norm(const std::string& prefix);
  FeedForwardBlock add_ff(const std::string& prefix);

  TransformerConfig config_;
  std::deque<NamedParam<T>> params_;
  std::unordered_map<std::string, int> index_;
  std::vector<EncoderLayer> encoder_;
  std::vector<DecoderLayer> decoder_;
  int enc_tok_ = -1, enc_pos_ = -1, dec_tok_ = -1, dec_pos_ = -1;
  int out_w_ = -1, out_b_ = -1;
};

using Seq2SeqModel = BasicSeq2Seq<float>;

// One forward computation over a model. Training passes bind parameters as
// gradient leaves; evaluation passes bind them read-only and never record.
template <typename T>
class ForwardPass {
 public:
  // Recording pass; dropout is active when `train`.
  ForwardPass(BasicSeq2Seq<T>& model, bool train, Rng* rng);
  // Evaluation pass over a frozen model.
  explicit ForwardPass(const BasicSeq2Seq<T>& model);

  Graph<T>& graph() { return graph_; }

  // Token plus learned position embedding, then dropout. `decoder_side`
  // picks the decoder tables. Throws InputTooLongError past max_seq_len.
  Var embed_with_position(const TokenBatch& ids, bool decoder_side);

  // Projects q/k/v inputs, attends per head, concatenates and projects by
  // W^o.
  Var multi_head_attention(
      const typename BasicSeq2Seq<T>::AttentionBlock& block, Var query_in,
      Var key_value_in, const AttentionLayout& layout);

  // Encoder stack; returns [batch*src_len, H].
  Var encode(const TokenBatch& src);
  // Decoder stack over teacher-forced inputs; returns logits
  // [batch*tgt_len, vocab].
  Var decode(const TokenBatch& tgt, Var memory, const TokenBatch& src);
  // Decoder hidden states before the output projection.
  Var decoder_states(const TokenBatch& tgt, Var memory, const TokenBatch& src);
  Var project(Var states);

  // Every attention output produced so far, in creation order.
  const std::vector<Var>& attention_nodes() const { return attention_nodes_; }

 private:
  Var param(int index) const { return vars_[index]; }
  Var norm(Var x, const typename BasicSeq2Seq<T>::NormBlock& block);
  Var feed_forward(Var x,
                   const typename BasicSeq2Seq<T>::FeedForwardBlock& block);
  Var drop(Var x);

  const BasicSeq2Seq<T>& model_;
  Graph<T> graph_;
  bool train_;
  Rng* rng_;
  std::vector<Var> vars_;
  std::vector<Var> attention_nodes_;
};

// Key-padding layout: query rows of batch b may see every non-PAD key.
AttentionLayout padding_layout(const TokenBatch& queries,
                               const TokenBatch& keys, int heads);
// Causal plus key-padding layout for decoder self-attention.
AttentionLayout causal_layout(const TokenBatch& tgt, int heads);

// SOS + content + EOS.
std::vector<TokenId> wrap_source(std::span<const TokenId> content);

// Teacher-forced loss of a batch: encoder reads SOS+src+EOS, decoder reads
// SOS+tgt and predicts tgt+EOS; PAD labels are ignored.
template <typename T>
Var seq2seq_loss(ForwardPass<T>& pass,
                 std::span<const std::vector<TokenId>> sources,
                 std::span<const std::vector<TokenId>> targets);

// Eval-mode logits [tgt.size() x vocab] of the decoder fed SOS + `tgt`
// prefix tokens (row t predicts token t+1 of the output).
template <typename T>
std::vector<T> decoder_logits(const BasicSeq2Seq<T>& model,
                              std::span<const TokenId> src,
                              std::span<const TokenId> tgt);

// Starts from SOS, appends the most probable token (lowest id on ties) until
// EOS or `max_len` tokens. EOS is not included in the result.
template <typename T>
std::vector<TokenId> greedy_decode(const BasicSeq2Seq<T>& model,
                                   std::span<const TokenId> src, int max_len);

// Greedy decoding of several inputs in one batch.
template <typename T>
std::vector<std::vector<TokenId>> greedy_decode_batch(
    const BasicSeq2Seq<T>& model,
    std::span<const std::vector<TokenId>> sources, int max_len);

struct BeamHypothesis {
  std::vector<TokenId> ids;
  // Sum of token log-probabilities (EOS included when finished).
  double log_prob = 0.0;
  // log_prob divided by the number of scored tokens.
  double score = 0.0;
  bool finished = false;
};

// Length-normalized beam search. Results are sorted by score, descending.
// Candidates are ranked by (cumulative log-prob, step log-prob, token id) so
// that a beam of one follows greedy_decode exactly.
template <typename T>
std::vector<BeamHypothesis> beam_decode(const BasicSeq2Seq<T>& model,
                                        std::span<const TokenId> src,
                                        int beam, int max_len);

}  // namespace dpcspell
