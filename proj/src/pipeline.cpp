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

#include "dpcspell/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

#include "dpcspell/errors.hpp"
#include "dpcspell/kernels.hpp"
#include "dpcspell/utf8.hpp"
#include "io_util.hpp"

namespace dpcspell {

std::string_view label(StageVariant v) {
  switch (v) {
    case StageVariant::DPC: return "dpc";
    case StageVariant::DC: return "dc";
    case StageVariant::C: return "c";
  }
  return "?";
}

std::string_view label(StageRole r) {
  switch (r) {
    case StageRole::Detector: return "detector";
    case StageRole::Purificator: return "purificator";
    case StageRole::Corrector: return "corrector";
  }
  return "?";
}

StageVariant parse_variant(std::string_view s) {
  if (s == "dpc") return StageVariant::DPC;
  if (s == "dc") return StageVariant::DC;
  if (s == "c") return StageVariant::C;
  throw UsageError("unknown variant '" + std::string(s) +
                   "' (expected dpc, dc or c)");
}

StageRole parse_role(std::string_view s) {
  if (s == "detector") return StageRole::Detector;
  if (s == "purificator") return StageRole::Purificator;
  if (s == "corrector") return StageRole::Corrector;
  throw UsageError("unknown stage '" + std::string(s) +
                   "' (expected detector, purificator or corrector)");
}

void check_role_for_variant(StageRole role, StageVariant variant) {
  if (variant == StageVariant::C && role != StageRole::Corrector) {
    throw UsageError("variant c has only a corrector stage, not " +
                     std::string(label(role)));
  }
  if (variant == StageVariant::DC && role == StageRole::Purificator) {
    throw UsageError("variant dc has no purificator stage");
  }
}

// ---- examples --------------------------------------------------------------

namespace {

std::vector<TokenId> sep_joined(std::u32string_view a, std::u32string_view b,
                                const Vocab& vocab) {
  std::vector<TokenId> out;
  out.reserve(a.size() + b.size() + 3);
  out.push_back(Vocab::kSep);
  for (char32_t c : a) out.push_back(vocab.id_of(c));
  out.push_back(Vocab::kSep);
  for (char32_t c : b) out.push_back(vocab.id_of(c));
  out.push_back(Vocab::kSep);
  return out;
}

void check_mask(const ParallelPair& pair, char32_t glyph) {
  if (pair.mask.size() != pair.source.size()) {
    throw DataError("mask '" + utf8::encode(pair.mask) +
                    "' does not match the length of source '" +
                    utf8::encode(pair.source) + "'");
  }
  for (std::size_t j = 0; j < pair.mask.size(); ++j) {
    if (pair.mask[j] != pair.source[j] && pair.mask[j] != glyph) {
      throw DataError("mask '" + utf8::encode(pair.mask) +
                      "' disagrees with source '" + utf8::encode(pair.source) +
                      "' at position " + std::to_string(j));
    }
  }
}

}  // namespace

StageExample make_detector_example(const ParallelPair& pair,
                                   const Vocab& vocab) {
  check_mask(pair, vocab.mask_glyph());
  return {vocab.encode(pair.source), vocab.encode(pair.mask),
          StageRole::Detector};
}

StageExample make_purificator_example(const ParallelPair& pair,
                                      std::u32string_view detected,
                                      const Vocab& vocab) {
  return {sep_joined(pair.source, detected, vocab), vocab.encode(pair.mask),
          StageRole::Purificator};
}

StageExample make_corrector_example(const ParallelPair& pair,
                                    std::u32string_view purified,
                                    const Vocab& vocab) {
  return {sep_joined(pair.source, purified, vocab), vocab.encode(pair.target),
          StageRole::Corrector};
}

StageExample make_plain_corrector_example(const ParallelPair& pair,
                                          const Vocab& vocab) {
  return {vocab.encode(pair.source), vocab.encode(pair.target),
          StageRole::Corrector};
}

StageExample make_stage_example(StageRole role, StageVariant variant,
                                const ParallelPair& pair, const Vocab& vocab) {
  check_role_for_variant(role, variant);
  switch (role) {
    case StageRole::Detector:
      return make_detector_example(pair, vocab);
    case StageRole::Purificator:
      return make_purificator_example(pair, pair.mask, vocab);
    case StageRole::Corrector:
      if (variant == StageVariant::C) {
        return make_plain_corrector_example(pair, vocab);
      }
      return make_corrector_example(pair, pair.mask, vocab);
  }
  throw UsageError("unknown stage role");
}

std::string TrainingLog::to_csv() const {
  std::string out = "epoch,train_loss,val_loss,seconds\n";
  char buf[160];
  for (const EpochLog& e : epochs) {
    if (e.val_loss) {
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.3f\n", e.epoch,
                    e.train_loss, *e.val_loss, e.seconds);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.6f,,%.3f\n", e.epoch, e.train_loss,
                    e.seconds);
    }
    out += buf;
  }
  return out;
}

// ---- training --------------------------------------------------------------

namespace {

void check_example_lengths(std::span<const StageExample> examples,
                           int max_seq_len, const char* which) {
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const std::size_t in = examples[i].input.size() + 2;
    const std::size_t out = examples[i].target.size() + 1;
    if (in > static_cast<std::size_t>(max_seq_len) ||
        out > static_cast<std::size_t>(max_seq_len)) {
      throw DataError(std::string(which) + " example " + std::to_string(i) +
                      " needs " + std::to_string(std::max(in, out)) +
                      " positions but max_seq_len is " +
                      std::to_string(max_seq_len));
    }
  }
}

// Shuffled batches; inside windows of 8 batches the examples are ordered by
// length so that each batch carries little padding, then the batch order is
// shuffled again.
std::vector<std::vector<std::size_t>> make_batches(
    std::span<const StageExample> examples, int batch_size, Rng& rng) {
  std::vector<std::size_t> idx(examples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(idx);
  const std::size_t bs = static_cast<std::size_t>(std::max(batch_size, 1));
  const std::size_t window = bs * 8;
  for (std::size_t w = 0; w < idx.size(); w += window) {
    auto first = idx.begin() + w;
    auto last = idx.begin() + std::min(idx.size(), w + window);
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return examples[a].input.size() < examples[b].input.size();
    });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t s = 0; s < idx.size(); s += bs) {
    batches.emplace_back(idx.begin() + s,
                         idx.begin() + std::min(idx.size(), s + bs));
  }
  rng.shuffle(batches);
  return batches;
}

std::size_t label_count(std::span<const std::vector<TokenId>> targets) {
  std::size_t n = 0;
  for (const auto& t : targets) n += t.size() + 1;
  return n;
}

double evaluate_loss(const Seq2SeqModel& model,
                     std::span<const StageExample> examples, int batch_size) {
  double total = 0.0;
  std::size_t tokens = 0;
  const std::size_t bs = static_cast<std::size_t>(std::max(batch_size, 1));
  for (std::size_t s = 0; s < examples.size(); s += bs) {
    std::vector<std::vector<TokenId>> src;
    std::vector<std::vector<TokenId>> tgt;
    for (std::size_t i = s; i < std::min(examples.size(), s + bs); ++i) {
      src.push_back(examples[i].input);
      tgt.push_back(examples[i].target);
    }
    ForwardPass<float> pass(model);
    Var loss = seq2seq_loss(pass, std::span<const std::vector<TokenId>>(src),
                            std::span<const std::vector<TokenId>>(tgt));
    const std::size_t n = label_count(tgt);
    total += static_cast<double>(pass.graph().scalar(loss)) * n;
    tokens += n;
  }
  return tokens == 0 ? 0.0 : total / tokens;
}

void check_architecture(const TransformerConfig& a, const TransformerConfig& b) {
  if (a.num_layers != b.num_layers || a.num_heads != b.num_heads ||
      a.hidden_dim != b.hidden_dim || a.pf_dim != b.pf_dim ||
      a.max_seq_len != b.max_seq_len || a.vocab_size != b.vocab_size) {
    throw UsageError(
        "resume checkpoint architecture differs from the configured model");
  }
}

Seq2SeqModel train_impl(std::span<const StageExample> train,
                        std::span<const std::vector<TokenId>> alt_inputs,
                        std::span<const StageExample> validation,
                        const TransformerConfig& config,
                        const TrainOptions& options, TrainingLog& log,
                        const Seq2SeqModel* init) {
  config.validate();
  if (train.empty()) throw DataError("training set is empty");
  if (options.batch_size < 1) throw UsageError("batch size must be positive");
  check_example_lengths(train, config.max_seq_len, "training");
  check_example_lengths(validation, config.max_seq_len, "validation");
  kernels::keep_heap_warm();

  if (init != nullptr) check_architecture(init->config(), config);
  Seq2SeqModel model =
      init != nullptr ? *init : Seq2SeqModel(config, mix_seed(options.seed, 11));
  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  std::vector<Tensor<float>*> params = model.parameter_tensors();
  Adam<float> opt(params, adam);

  Rng order_rng(mix_seed(options.seed, 1));
  Rng drop_rng(mix_seed(options.seed, 2));
  Rng sample_rng(mix_seed(options.seed, 3));
  const bool sampling = !alt_inputs.empty();

  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  std::vector<std::vector<float>> best_params;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    std::size_t token_sum = 0;
    for (const auto& batch : make_batches(train, options.batch_size, order_rng)) {
      std::vector<std::vector<TokenId>> src;
      std::vector<std::vector<TokenId>> tgt;
      src.reserve(batch.size());
      tgt.reserve(batch.size());
      for (std::size_t i : batch) {
        const bool swap = sampling && sample_rng.bernoulli(options.sampling_rate);
        src.push_back(swap ? alt_inputs[i] : train[i].input);
        tgt.push_back(train[i].target);
      }
      opt.zero_grad();
      ForwardPass<float> pass(model, true, &drop_rng);
      Var loss = seq2seq_loss(pass, std::span<const std::vector<TokenId>>(src),
                              std::span<const std::vector<TokenId>>(tgt));
      const double value = pass.graph().scalar(loss);
      if (!std::isfinite(value)) {
        throw DivergenceError("non-finite training loss in epoch " +
                              std::to_string(epoch));
      }
      pass.graph().backward(loss);
      clip_grad_norm<float>(std::span<Tensor<float>* const>(params),
                            static_cast<float>(config.grad_clip));
      try {
        opt.step();
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " in epoch " +
                              std::to_string(epoch));
      }
      const std::size_t n = label_count(tgt);
      loss_sum += value * n;
      token_sum += n;
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(token_sum);
    if (!validation.empty()) {
      entry.val_loss = evaluate_loss(model, validation, options.batch_size);
      if (!std::isfinite(*entry.val_loss)) {
        throw DivergenceError("non-finite validation loss in epoch " +
                              std::to_string(epoch));
      }
    }
    entry.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0).count();
    log.epochs.push_back(entry);
    if (options.on_epoch) options.on_epoch(entry);

    if (options.early_stopping && entry.val_loss) {
      if (*entry.val_loss < best_val) {
        best_val = *entry.val_loss;
        best_epoch = epoch;
        best_params.clear();
        for (const Tensor<float>* p : params) best_params.push_back(p->values);
      } else if (epoch - best_epoch >= options.patience) {
        break;
      }
    }
  }
  if (!best_params.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i]->values = std::move(best_params[i]);
    }
  }
  for (Tensor<float>* p : params) std::vector<float>().swap(p->grad);
  return model;
}

}  // namespace

Seq2SeqModel train_seq2seq(std::span<const StageExample> train,
                           std::span<const StageExample> validation,
                           const TransformerConfig& config,
                           const TrainOptions& options, TrainingLog& log,
                           const Seq2SeqModel* init) {
  return train_impl(train, {}, validation, config, options, log, init);
}

TrainedStage train_stage(StageRole role, StageVariant variant,
                         const CorpusSplit& split, const Vocab& vocab,
                         TransformerConfig config, const TrainOptions& options,
                         const Seq2SeqModel* init) {
  check_role_for_variant(role, variant);
  if (split.train.empty()) throw DataError("training split is empty");
  config.vocab_size = static_cast<int>(vocab.size());
  std::vector<StageExample> train;
  std::vector<StageExample> val;
  for (const ParallelPair& p : split.train) {
    train.push_back(make_stage_example(role, variant, p, vocab));
  }
  for (const ParallelPair& p : split.validation) {
    val.push_back(make_stage_example(role, variant, p, vocab));
  }
  TrainingLog log;
  std::vector<std::vector<TokenId>> alt;
  if (options.scheduled_sampling && role == StageRole::Purificator) {
    if (options.detector == nullptr) {
      throw UsageError("scheduled sampling needs a trained detector");
    }
    std::vector<std::vector<TokenId>> sources;
    for (const ParallelPair& p : split.train) sources.push_back(vocab.encode(p.source));
    std::size_t mismatched = 0;
    for (std::size_t s = 0; s < sources.size(); s += 128) {
      const std::size_t e = std::min(sources.size(), s + 128);
      std::size_t longest = 0;
      for (std::size_t i = s; i < e; ++i) longest = std::max(longest, sources[i].size());
      const auto decoded = greedy_decode_batch(
          *options.detector,
          std::span<const std::vector<TokenId>>(sources.data() + s, e - s),
          static_cast<int>(longest) + 8);
      for (std::size_t i = s; i < e; ++i) {
        const std::u32string detected = vocab.decode(decoded[i - s]);
        if (detected.size() != split.train[i].source.size()) ++mismatched;
        alt.push_back(make_purificator_example(split.train[i], detected, vocab).input);
      }
    }
    log.length_mismatch_rate =
        static_cast<double>(mismatched) / static_cast<double>(sources.size());
  }
  Seq2SeqModel model = train_impl(train, alt, val, config, options, log, init);
  return {std::move(model), std::move(log)};
}

// ---- inference -------------------------------------------------------------

DecodeOptions parse_decode(std::string_view s) {
  DecodeOptions d;
  if (s == "greedy") return d;
  if (s.rfind("beam:", 0) == 0) {
    const std::string n(s.substr(5));
    char* end = nullptr;
    const long b = std::strtol(n.c_str(), &end, 10);
    if (!n.empty() && end != nullptr && *end == '\0' && b >= 1 && b <= 1000) {
      d.beam = static_cast<int>(b);
      return d;
    }
  }
  throw UsageError("decode mode must be 'greedy' or 'beam:B' with B >= 1, got '" +
                   std::string(s) + "'");
}

namespace {

const Seq2SeqModel& need(const Seq2SeqModel* m, const char* what) {
  if (m == nullptr) {
    throw UsageError(std::string("cascade is missing its ") + what + " model");
  }
  return *m;
}

void check_fits(const Seq2SeqModel& m, std::size_t content_len,
                const char* stage) {
  if (content_len + 2 > static_cast<std::size_t>(m.config().max_seq_len)) {
    throw InputTooLongError(std::string(stage) + " input of " +
                            std::to_string(content_len) +
                            " tokens exceeds max_seq_len " +
                            std::to_string(m.config().max_seq_len));
  }
}

// Greedy decoding of `inputs` in chunks; each output is capped at its own
// limit so results do not depend on how the words were grouped.
std::vector<std::u32string> greedy_stage(
    const Seq2SeqModel& model, const Vocab& vocab,
    const std::vector<std::vector<TokenId>>& inputs,
    const std::vector<int>& limits, int batch_size, const char* stage) {
  std::vector<std::u32string> out(inputs.size());
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    check_fits(model, inputs[i].size(), stage);
    live.push_back(i);
  }
  const std::size_t bs = static_cast<std::size_t>(std::max(batch_size, 1));
  for (std::size_t s = 0; s < live.size(); s += bs) {
    const std::size_t e = std::min(live.size(), s + bs);
    std::vector<std::vector<TokenId>> chunk;
    int limit = 0;
    for (std::size_t i = s; i < e; ++i) {
      chunk.push_back(inputs[live[i]]);
      limit = std::max(limit, limits[live[i]]);
    }
    auto decoded = greedy_decode_batch(
        model, std::span<const std::vector<TokenId>>(chunk), limit);
    for (std::size_t i = s; i < e; ++i) {
      auto& ids = decoded[i - s];
      if (static_cast<int>(ids.size()) > limits[live[i]]) ids.resize(limits[live[i]]);
      out[live[i]] = vocab.decode(ids);
    }
  }
  return out;
}

std::vector<TokenId> final_input(StageVariant variant, std::u32string_view word,
                                 const Correction& c, const Vocab& vocab) {
  switch (variant) {
    case StageVariant::C: return vocab.encode(word);
    case StageVariant::DC: return sep_joined(word, c.detected, vocab);
    case StageVariant::DPC: return sep_joined(word, c.purified, vocab);
  }
  return {};
}

}  // namespace

std::vector<Correction> correct_words(StageVariant variant,
                                      const Cascade& models,
                                      std::span<const std::u32string> words,
                                      const DecodeOptions& decode,
                                      int batch_size) {
  if (models.vocab == nullptr) throw UsageError("cascade has no vocabulary");
  const Vocab& vocab = *models.vocab;
  const Seq2SeqModel& corrector = need(models.corrector, "corrector");
  std::vector<Correction> out(words.size());
  std::vector<std::size_t> idx;  // non-empty words
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!words[i].empty()) idx.push_back(i);
  }
  if (idx.empty()) return out;
  std::vector<int> limits;
  for (std::size_t i : idx) limits.push_back(static_cast<int>(words[i].size()) + decode.slack);

  if (variant != StageVariant::C) {
    const Seq2SeqModel& det = need(models.detector, "detector");
    std::vector<std::vector<TokenId>> in;
    for (std::size_t i : idx) in.push_back(vocab.encode(words[i]));
    const auto detected = greedy_stage(det, vocab, in, limits, batch_size, "detector");
    for (std::size_t k = 0; k < idx.size(); ++k) {
      Correction& c = out[idx[k]];
      c.detected = detected[k];
      c.detector_length_mismatch = c.detected.size() != words[idx[k]].size();
    }
  }
  if (variant == StageVariant::DPC) {
    const Seq2SeqModel& pur = need(models.purificator, "purificator");
    std::vector<std::vector<TokenId>> in;
    for (std::size_t i : idx) in.push_back(sep_joined(words[i], out[i].detected, vocab));
    const auto purified = greedy_stage(pur, vocab, in, limits, batch_size, "purificator");
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]].purified = purified[k];
  }
  std::vector<std::vector<TokenId>> in;
  for (std::size_t i : idx) in.push_back(final_input(variant, words[i], out[i], vocab));
  if (decode.beam <= 0) {
    const auto final = greedy_stage(corrector, vocab, in, limits, batch_size, "corrector");
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out[idx[k]].output = final[k];
      out[idx[k]].candidates = {final[k]};
    }
  } else {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      check_fits(corrector, in[k].size(), "corrector");
      const auto hyps = beam_decode(corrector, std::span<const TokenId>(in[k]),
                                    decode.beam, limits[k]);
      Correction& c = out[idx[k]];
      for (const BeamHypothesis& h : hyps) c.candidates.push_back(vocab.decode(h.ids));
      c.output = c.candidates.front();
    }
  }
  return out;
}

Correction correct_word_variant(StageVariant variant, const Cascade& models,
                                std::u32string_view word,
                                const DecodeOptions& decode) {
  const std::vector<std::u32string> one{std::u32string(word)};
  return correct_words(variant, models, one, decode, 1)[0];
}

Correction correct_word(const Cascade& models, std::u32string_view word,
                        const DecodeOptions& decode) {
  return correct_word_variant(StageVariant::DPC, models, word, decode);
}

// ---- checkpoints -----------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  Reader(std::string_view bytes, std::string origin)
      : bytes_(bytes), origin_(std::move(origin)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::string_view str() {
    const std::uint32_t n = u32();
    need(n);
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError(origin_ + ": truncated checkpoint");
  }
  std::string_view bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize_checkpoint(const Seq2SeqModel& model, const Vocab& vocab,
                                 StageRole role, StageVariant variant) {
  const TransformerConfig& c = model.config();
  std::string text;
  text += "num_layers=" + std::to_string(c.num_layers) + "\n";
  text += "num_heads=" + std::to_string(c.num_heads) + "\n";
  text += "hidden_dim=" + std::to_string(c.hidden_dim) + "\n";
  text += "pf_dim=" + std::to_string(c.pf_dim) + "\n";
  text += "dropout=" + fmt_double(c.dropout) + "\n";
  text += "max_seq_len=" + std::to_string(c.max_seq_len) + "\n";
  text += "vocab_size=" + std::to_string(c.vocab_size) + "\n";
  text += "learning_rate=" + fmt_double(c.learning_rate) + "\n";
  text += "grad_clip=" + fmt_double(c.grad_clip) + "\n";
  text += "epochs=" + std::to_string(c.epochs) + "\n";
  text += "role=" + std::string(label(role)) + "\n";
  text += "variant=" + std::string(label(variant)) + "\n";
  text += "mask_glyph=" + utf8::encode(vocab.mask_glyph()) + "\n";

  std::string out = "DPCS";
  put_u32(out, kCheckpointVersion);
  put_str(out, text);
  put_u32(out, static_cast<std::uint32_t>(vocab.size()));
  for (TokenId id = 0; id < Vocab::kNumSpecials; ++id) put_str(out, Vocab::special_name(id));
  for (char32_t ch : vocab.chars()) put_str(out, utf8::encode(ch));
  put_u32(out, static_cast<std::uint32_t>(model.parameters().size()));
  for (const auto& p : model.parameters()) {
    put_str(out, p.name);
    put_u32(out, static_cast<std::uint32_t>(p.tensor.shape.size()));
    for (int d : p.tensor.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : p.tensor.values) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      put_u32(out, bits);
    }
  }
  put_u64(out, fnv1a64(out));
  return out;
}

StageCheckpoint parse_checkpoint(const std::string& bytes,
                                 const std::string& origin) {
  if (bytes.size() < 16 || bytes.compare(0, 4, "DPCS") != 0) {
    throw CheckpointError(origin + ": not a checkpoint (bad magic)");
  }
  const std::string_view body(bytes.data(), bytes.size() - 8);
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<std::uint64_t>(
                  static_cast<unsigned char>(bytes[bytes.size() - 8 + i])) << (8 * i);
  }
  Reader rd(body.substr(4), origin);
  const std::uint32_t version = rd.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(origin + ": unsupported checkpoint version " +
                          std::to_string(version) + " (this build reads " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  if (fnv1a64(body) != stored) {
    throw CheckpointError(origin + ": checksum mismatch (file is corrupt or truncated)");
  }
  std::map<std::string, std::string> kv;
  {
    const std::string text(rd.str());
    for (const std::string& line : detail::split_lines(text)) {
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw CheckpointError(origin + ": bad config line '" + line + "'");
      kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw CheckpointError(origin + ": config lacks '" + key + "'");
    return it->second;
  };
  TransformerConfig c;
  try {
    c.num_layers = std::stoi(get("num_layers"));
    c.num_heads = std::stoi(get("num_heads"));
    c.hidden_dim = std::stoi(get("hidden_dim"));
    c.pf_dim = std::stoi(get("pf_dim"));
    c.dropout = std::stod(get("dropout"));
    c.max_seq_len = std::stoi(get("max_seq_len"));
    c.vocab_size = std::stoi(get("vocab_size"));
    c.learning_rate = std::stod(get("learning_rate"));
    c.grad_clip = std::stod(get("grad_clip"));
    c.epochs = std::stoi(get("epochs"));
  } catch (const std::logic_error&) {
    throw CheckpointError(origin + ": malformed number in config block");
  }
  StageRole role;
  StageVariant variant;
  try {
    role = parse_role(get("role"));
    variant = parse_variant(get("variant"));
  } catch (const UsageError& e) {
    throw CheckpointError(origin + ": " + e.what());
  }
  const std::u32string glyph = utf8::decode(get("mask_glyph"));
  if (glyph.size() != 1) throw CheckpointError(origin + ": bad mask glyph");

  const std::uint32_t ntok = rd.u32();
  if (ntok < static_cast<std::uint32_t>(Vocab::kNumSpecials)) {
    throw CheckpointError(origin + ": vocabulary lacks special tokens");
  }
  std::u32string chars;
  for (std::uint32_t i = 0; i < ntok; ++i) {
    const std::string_view tok = rd.str();
    if (i < static_cast<std::uint32_t>(Vocab::kNumSpecials)) {
      if (tok != Vocab::special_name(static_cast<TokenId>(i))) {
        throw CheckpointError(origin + ": unexpected special token order");
      }
      continue;
    }
    const std::u32string ch = utf8::decode(tok);
    if (ch.size() != 1) throw CheckpointError(origin + ": vocabulary token is not one character");
    chars += ch;
  }
  Vocab vocab(chars, glyph[0]);
  if (vocab.size() != ntok || static_cast<int>(ntok) != c.vocab_size) {
    throw CheckpointError(origin + ": vocabulary size disagrees with config");
  }
  try {
    c.validate();
  } catch (const DataError& e) {
    throw CheckpointError(origin + ": " + e.what());
  }
  Seq2SeqModel model(c, 0);
  const std::uint32_t nparams = rd.u32();
  if (nparams != model.parameters().size()) {
    throw CheckpointError(origin + ": expected " + std::to_string(model.parameters().size()) +
                          " parameter arrays, found " + std::to_string(nparams));
  }
  for (std::uint32_t i = 0; i < nparams; ++i) {
    const std::string name(rd.str());
    Tensor<float>* t = model.find(name);
    if (t == nullptr) throw CheckpointError(origin + ": unknown parameter '" + name + "'");
    const std::uint32_t rank = rd.u32();
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<int>(rd.u32()));
    if (shape != t->shape) {
      throw CheckpointError(origin + ": parameter '" + name + "' has shape " +
                            shape_string(shape) + ", expected " + shape_string(t->shape));
    }
    for (float& v : t->values) v = rd.f32();
  }
  if (!rd.done()) throw CheckpointError(origin + ": trailing bytes after parameters");
  return {std::move(model), std::move(vocab), role, variant};
}

void save_checkpoint(const Seq2SeqModel& model, const Vocab& vocab,
                     StageRole role, StageVariant variant,
                     const std::filesystem::path& path) {
  detail::write_file(path, serialize_checkpoint(model, vocab, role, variant));
}

StageCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(detail::read_file(path), path.string());
}

// ---- scorer ----------------------------------------------------------------

double TransformerScorer::score(const ParallelPair& pair) const {
  const std::vector<TokenId> src = vocab_.encode(pair.target);
  std::vector<TokenId> tgt = vocab_.encode(pair.source);
  const std::vector<float> logits =
      decoder_logits(model_, std::span<const TokenId>(src), std::span<const TokenId>(tgt));
  tgt.push_back(Vocab::kEos);
  const int V = model_.config().vocab_size;
  double nll = 0.0;
  for (std::size_t t = 0; t < tgt.size(); ++t) {
    const float* row = logits.data() + t * V;
    double mx = row[0];
    for (int v = 1; v < V; ++v) mx = std::max(mx, static_cast<double>(row[v]));
    double se = 0.0;
    for (int v = 0; v < V; ++v) se += std::exp(row[v] - mx);
    nll -= row[tgt[t]] - mx - std::log(se);
  }
  return nll / static_cast<double>(tgt.size());
}

Seq2SeqModel train_scorer_model(std::span<const ParallelPair> pairs,
                                const Vocab& vocab, TransformerConfig config,
                                const TrainOptions& options) {
  config.vocab_size = static_cast<int>(vocab.size());
  std::vector<StageExample> train;
  for (const ParallelPair& p : pairs) {
    train.push_back({vocab.encode(p.target), vocab.encode(p.source), StageRole::Corrector});
  }
  TrainingLog log;
  return train_seq2seq(train, {}, config, options, log);
}

}  // namespace dpcspell
