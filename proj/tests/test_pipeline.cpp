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
#include <cstring>

#include "dpcspell/errorgen.hpp"
#include "dpcspell/errors.hpp"
#include "dpcspell/pipeline.hpp"
#include "oracles.hpp"

using namespace dpcspell;

namespace {

ParallelPair make_pair(std::u32string source, std::u32string target, ErrorType t = ErrorType::Cognitive) {
  ParallelPair p;
  p.mask = derive_mask(source, target);
  p.source = std::move(source);
  p.target = std::move(target);
  p.error_type = t;
  return p;
}

std::vector<ParallelPair> ten_pairs() {
  return {make_pair(U"wrod", U"word"),   make_pair(U"hte", U"the"),     make_pair(U"cta", U"cat"),
          make_pair(U"dgo", U"dog"),     make_pair(U"fots", U"foot"),   make_pair(U"balll", U"ball"),
          make_pair(U"sunn", U"sun"),    make_pair(U"mon", U"moon"),    make_pair(U"footbal", U"football"),
          make_pair(U"treee", U"tree")};
}

TransformerConfig small(const Vocab& v) {
  TransformerConfig c;
  c.num_layers = 1;
  c.num_heads = 2;
  c.hidden_dim = 16;
  c.pf_dim = 32;
  c.dropout = 0.0;
  c.max_seq_len = 32;
  c.vocab_size = static_cast<int>(v.size());
  c.learning_rate = 3e-3;
  c.epochs = 50;
  return c;
}

std::vector<StageExample> examples(StageRole role, StageVariant variant, std::span<const ParallelPair> pairs,
                                   const Vocab& v) {
  std::vector<StageExample> out;
  for (const auto& p : pairs) out.push_back(make_stage_example(role, variant, p, v));
  return out;
}

bool same_params(const Seq2SeqModel& a, const Seq2SeqModel& b) {
  if (a.parameters().size() != b.parameters().size()) return false;
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    if (a.parameters()[i].name != b.parameters()[i].name) return false;
    if (a.parameters()[i].tensor.values != b.parameters()[i].tensor.values) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("labels") {
  CHECK(parse_variant("dpc") == StageVariant::DPC);
  CHECK(parse_variant("c") == StageVariant::C);
  CHECK(label(StageVariant::DC) == "dc");
  CHECK(parse_role("purificator") == StageRole::Purificator);
  CHECK_THROWS_AS(parse_variant("xyz"), UsageError);
  CHECK_THROWS_AS(parse_role("fixer"), UsageError);
  CHECK_THROWS_AS(check_role_for_variant(StageRole::Detector, StageVariant::C), UsageError);
  CHECK_THROWS_AS(check_role_for_variant(StageRole::Purificator, StageVariant::DC), UsageError);
  CHECK_NOTHROW(check_role_for_variant(StageRole::Purificator, StageVariant::DPC));
}

TEST_CASE("stage examples") {
  const auto pairs = ten_pairs();
  const Vocab v = build_vocab(pairs);
  const ParallelPair& p = pairs[0];  // wrod -> word
  const StageExample d = make_detector_example(p, v);
  CHECK(d.input == v.encode(U"wrod"));
  CHECK(d.target.size() == p.source.size());
  CHECK(std::count(d.target.begin(), d.target.end(), Vocab::kMask) >= 1);

  const StageExample pu = make_purificator_example(p, U"w_od", v);
  CHECK(std::count(pu.input.begin(), pu.input.end(), Vocab::kSep) == 3);
  CHECK(pu.input.front() == Vocab::kSep);
  CHECK(pu.input.back() == Vocab::kSep);
  CHECK(pu.input.size() == 3 + 4 + 4);
  CHECK(pu.target == v.encode(p.mask));

  const StageExample co = make_stage_example(StageRole::Corrector, StageVariant::DPC, p, v);
  std::vector<TokenId> want{Vocab::kSep};
  for (TokenId t : v.encode(p.source)) want.push_back(t);
  want.push_back(Vocab::kSep);
  for (TokenId t : v.encode(p.mask)) want.push_back(t);
  want.push_back(Vocab::kSep);
  CHECK(co.input == want);
  CHECK(co.target == v.encode(U"word"));
  const StageExample plain = make_stage_example(StageRole::Corrector, StageVariant::C, p, v);
  CHECK(plain.input == v.encode(p.source));

  // run-on: the missing space is masked on a neighbouring source char
  const ParallelPair runon = make_pair(U"football", U"foot ball", ErrorType::RunOn);
  const Vocab rv = build_vocab(std::vector<ParallelPair>{runon});
  const StageExample rd = make_detector_example(runon, rv);
  CHECK(rd.target.size() == 8);
  CHECK(std::count(rd.target.begin(), rd.target.end(), Vocab::kMask) == 1);

  ParallelPair bad = p;
  bad.mask = U"w_";
  CHECK_THROWS_AS(make_detector_example(bad, v), DataError);
}

TEST_CASE("training log csv") {
  TrainingLog log;
  log.epochs.push_back({1, 2.5, 3.25, 0.5});
  log.epochs.push_back({2, 2.0, std::nullopt, 0.25});
  CHECK(log.to_csv() == "epoch,train_loss,val_loss,seconds\n1,2.500000,3.250000,0.500\n2,2.000000,,0.250\n");
}

TEST_CASE("training") {
  const auto pairs = ten_pairs();
  const Vocab v = build_vocab(pairs);
  const auto ex = examples(StageRole::Corrector, StageVariant::C, pairs, v);
  TrainOptions opt;
  opt.batch_size = 4;
  opt.seed = 3;

  TransformerConfig zero = small(v);
  zero.epochs = 0;
  TrainingLog empty_log;
  const Seq2SeqModel untouched = train_seq2seq(ex, {}, zero, opt, empty_log);
  CHECK(empty_log.epochs.empty());

  TrainingLog log;
  int calls = 0;
  opt.on_epoch = [&](const EpochLog&) { ++calls; };
  const Seq2SeqModel trained = train_seq2seq(ex, ex, small(v), opt, log);
  REQUIRE(log.epochs.size() == 50);
  CHECK(calls == 50);
  CHECK(log.epochs.back().train_loss < 0.5 * log.epochs.front().train_loss);
  CHECK(log.epochs.back().val_loss.has_value());
  CHECK(*log.epochs.back().val_loss < *log.epochs.front().val_loss);
  CHECK_FALSE(same_params(untouched, trained));

  // same seed, same weights
  TransformerConfig five = small(v);
  five.epochs = 5;
  TrainOptions plain;
  plain.batch_size = 4;
  plain.seed = 3;
  TrainingLog l1, l2, l3;
  const Seq2SeqModel a = train_seq2seq(ex, {}, five, plain, l1);
  const Seq2SeqModel b = train_seq2seq(ex, {}, five, plain, l2);
  CHECK(same_params(a, b));
  plain.seed = 4;
  const Seq2SeqModel c = train_seq2seq(ex, {}, five, plain, l3);
  CHECK_FALSE(same_params(a, c));
  CHECK_FALSE(l1.epochs.back().val_loss.has_value());

  // resuming rejects a different architecture
  TransformerConfig wider = five;
  wider.hidden_dim = 32;
  TrainingLog l4;
  CHECK_THROWS_AS(train_seq2seq(ex, {}, wider, plain, l4, &a), UsageError);

  TransformerConfig wild = five;
  wild.learning_rate = 1e30;
  TrainingLog l5;
  CHECK_THROWS_AS(train_seq2seq(ex, {}, wild, plain, l5), DivergenceError);

  std::vector<StageExample> too_long{{std::vector<TokenId>(40, 6), {6}, StageRole::Corrector}};
  TrainingLog l6;
  CHECK_THROWS_AS(train_seq2seq(too_long, {}, five, plain, l6), DataError);
}

TEST_CASE("checkpoints") {
  const auto pairs = ten_pairs();
  const Vocab v = build_vocab(pairs);
  const Seq2SeqModel m(small(v), 9);
  const std::string bytes = serialize_checkpoint(m, v, StageRole::Purificator, StageVariant::DPC);
  CHECK(bytes.substr(0, 4) == "DPCS");
  const StageCheckpoint back = parse_checkpoint(bytes);
  CHECK(back.model.config() == m.config());
  CHECK(same_params(back.model, m));
  CHECK(back.vocab == v);
  CHECK(back.role == StageRole::Purificator);
  CHECK(back.variant == StageVariant::DPC);
  for (int i = 0; i < 20; ++i) {
    const auto probe = v.encode(pairs[i % 10].source + (i >= 10 ? U"s" : U""));
    CHECK(greedy_decode(back.model, probe, 12) == greedy_decode(m, probe, 12));
  }
  CHECK(serialize_checkpoint(back.model, back.vocab, back.role, back.variant) == bytes);

  oracle::TempDir dir("ckpt");
  save_checkpoint(m, v, StageRole::Corrector, StageVariant::C, dir.path() / "m.ckpt");
  CHECK(same_params(load_checkpoint(dir.path() / "m.ckpt").model, m));
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "none.ckpt"), Error);

  CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, bytes.size() / 2)), CheckpointError);
  CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, 3)), CheckpointError);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(parse_checkpoint(magic), CheckpointError);
  std::string version = bytes;
  const std::uint32_t next = kCheckpointVersion + 1;
  std::memcpy(version.data() + 4, &next, 4);
  try {
    parse_checkpoint(version);
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  try {
    parse_checkpoint(flipped);
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(std::string(e.what()).find("checksum") != std::string::npos);
  }
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("decode option parsing") {
  CHECK(parse_decode("greedy").beam == 0);
  CHECK(parse_decode("beam:5").beam == 5);
  CHECK(parse_decode("beam:1").beam == 1);
  for (const char* bad : {"beam:0", "beam:", "beam:x", "beam", "Greedy", "beam:1001", "beam:-2"}) {
    CHECK_THROWS_AS(parse_decode(bad), UsageError);
  }
}

TEST_CASE("cascade dispatch") {
  const auto pairs = ten_pairs();
  const Vocab v = build_vocab(pairs);
  const Seq2SeqModel det(small(v), 1), pur(small(v), 2), cor(small(v), 3);
  const Cascade dpc{&det, &pur, &cor, &v};
  const Cascade dc{&det, nullptr, &cor, &v};
  const Cascade c{nullptr, nullptr, &cor, &v};
  const std::u32string word = U"wrod";
  const int limit = 4 + 8;

  const Correction r = correct_word(dpc, word);
  const auto detected = v.decode(greedy_decode(det, v.encode(word), limit));
  CHECK(r.detected == detected);
  const auto pin = make_purificator_example(make_pair(word, word), detected, v).input;
  const auto purified = v.decode(greedy_decode(pur, pin, limit));
  CHECK(r.purified == purified);
  const auto cin = make_corrector_example(make_pair(word, word), purified, v).input;
  CHECK(r.output == v.decode(greedy_decode(cor, cin, limit)));
  CHECK(r.candidates == std::vector<std::u32string>{r.output});

  // without a purificator the detector output goes straight on
  const Correction rdc = correct_word_variant(StageVariant::DC, dc, word);
  CHECK(rdc.purified.empty());
  CHECK(rdc.detected == detected);
  const auto din = make_corrector_example(make_pair(word, word), rdc.detected, v).input;
  CHECK(rdc.output == v.decode(greedy_decode(cor, din, limit)));

  const Correction rc = correct_word_variant(StageVariant::C, c, word);
  CHECK(rc.output == v.decode(greedy_decode(cor, v.encode(word), limit)));

  CHECK(correct_word(dpc, U"").output.empty());
  CHECK_THROWS_AS(correct_word_variant(StageVariant::DPC, dc, word), UsageError);
  CHECK_THROWS_AS(correct_word(dpc, std::u32string(40, U'w')), InputTooLongError);

  // batched correction matches word-by-word
  std::vector<std::u32string> words;
  for (const auto& p : pairs) words.push_back(p.source);
  words.push_back(U"");
  const auto many = correct_words(StageVariant::DPC, dpc, words, {}, 3);
  REQUIRE(many.size() == words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    CHECK(many[i].output == correct_word(dpc, words[i]).output);
  }
  DecodeOptions beam;
  beam.beam = 3;
  const Correction rb = correct_word(dpc, word, beam);
  CHECK(rb.candidates.size() <= 3);
  CHECK(rb.output == rb.candidates.front());
  DecodeOptions one;
  one.beam = 1;
  CHECK(correct_word(dpc, word, one).output == r.output);
}

TEST_CASE("transformer scorer") {
  const auto pairs = ten_pairs();
  const Vocab v = build_vocab(pairs);
  TrainOptions opt;
  opt.batch_size = 5;
  TransformerConfig cfg = small(v);
  cfg.epochs = 30;
  const Seq2SeqModel m = train_scorer_model(pairs, v, cfg, opt);
  const TransformerScorer scorer(m, v);
  double seen = 0.0;
  for (const auto& p : pairs) seen += scorer.score(p);
  seen /= 10;
  const double odd = scorer.score(make_pair(U"qqqq", U"word"));
  CHECK(std::isfinite(seen));
  CHECK(seen < odd);
}
