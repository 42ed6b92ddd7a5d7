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

#include <map>
#include <set>

#include "dpcspell/baseline.hpp"
#include "dpcspell/errorgen.hpp"
#include "dpcspell/errors.hpp"
#include "dpcspell/utf8.hpp"
#include "oracles.hpp"

using namespace dpcspell;

namespace {

ConfusionTable table_of(std::initializer_list<std::pair<std::u32string, std::vector<std::u32string>>> rows) {
  ConfusionTable t;
  for (const auto& [k, v] : rows) t.add(k, v);
  return t;
}

Lexicon toy_lexicon() {
  return load_wordlist(DPCSPELL_DATA_DIR "/wordlist.txt", Alphabet::ascii_lowercase());
}

class LengthScorer final : public PlausibilityScorer {
 public:
  double score(const ParallelPair& p) const override { return static_cast<double>(p.source.size()); }
};

}  // namespace

TEST_CASE("derive_mask examples") {
  CHECK(derive_mask(U"wprd", U"word") == U"w_rd");
  CHECK(derive_mask(U"word", U"word") == U"word");
  CHECK(derive_mask(U"football", U"foot") == U"foot____");
  CHECK(derive_mask(U"wrd", U"word") == U"w_d");
  CHECK(derive_mask(U"", U"abc") == U"");
  CHECK(derive_mask(U"foot ball", U"football") == U"foot_ball");
}

TEST_CASE("derive_mask matches the brute-force oracle") {
  Rng rng(3);
  const std::u32string letters = U"ab ";
  for (int trial = 0; trial < 500; ++trial) {
    std::u32string s, t;
    const std::size_t ns = rng.uniform_index(6), nt = rng.uniform_index(6);
    for (std::size_t i = 0; i < ns; ++i) s.push_back(letters[rng.uniform_index(3)]);
    for (std::size_t i = 0; i < nt; ++i) t.push_back(letters[rng.uniform_index(3)]);
    const auto m = derive_mask(s, t);
    CHECK(m == oracle::mask(s, t));
    REQUIRE(m.size() == s.size());
    const auto glyphs = std::count(m.begin(), m.end(), U'_');
    if (s == t) CHECK(glyphs == 0);
    if (s != t && !s.empty()) CHECK(glyphs >= 1);
  }
}

TEST_CASE("confusion tables") {
  ConfusionTable t;
  CHECK_THROWS_AS(t.add(U"o", {}), DataError);
  CHECK_THROWS_AS(t.add(U"o", {U"o"}), DataError);
  oracle::TempDir dir("tables");
  const auto p = dir.file("t.txt", "# comment\no:0,p\n\nrn:m\n");
  const ConfusionTable loaded = load_confusion_table(p);
  REQUIRE(loaded.find(U"o") != nullptr);
  CHECK(*loaded.find(U"o") == std::vector<std::u32string>{U"0", U"p"});
  CHECK(*loaded.find(U"rn") == std::vector<std::u32string>{U"m"});
  CHECK_THROWS_AS(load_confusion_table(dir.file("bad.txt", "nocolon\n")), DataError);
  const Alphabet alphabet = load_alphabet(DPCSPELL_DATA_DIR "/alphabet.txt");
  for (const char* f : {"cognitive.txt", "visual_single.txt", "visual_combined.txt", "typo_avro.txt",
                        "typo_bijoy.txt", "insertion_neighbors.txt"}) {
    CHECK_NOTHROW(load_confusion_table(std::string(DPCSPELL_DATA_DIR "/") + f).validate(alphabet));
  }
  CHECK_THROWS_AS(loaded.validate(alphabet), DataError);  // '0' is not a letter
}

TEST_CASE("segment_units") {
  const std::vector<std::u32string> combined{U"rn", U"ch", U"sch"};
  const auto u = segment_units(U"schorn", combined);
  CHECK(u == std::vector<std::u32string>{U"sch", U"o", U"rn"});
}

TEST_CASE("gen_substitution") {
  Rng rng(1);
  const auto forced = table_of({{U"o", {U"0"}}});
  auto p = gen_substitution(U"word", forced, ErrorType::Cognitive, rng);
  REQUIRE(p);
  CHECK(p->source == U"w0rd");
  CHECK(p->mask == U"w_rd");
  CHECK(p->target == U"word");
  CHECK(p->error_type == ErrorType::Cognitive);
  CHECK_FALSE(gen_substitution(U"zzz", forced, ErrorType::Cognitive, rng));

  const auto cog = load_confusion_table(DPCSPELL_DATA_DIR "/cognitive.txt");
  const Lexicon lex = toy_lexicon();
  int made = 0;
  for (const auto& w : lex.words()) {
    auto q = gen_substitution(w, cog, ErrorType::Cognitive, rng);
    if (!q) continue;
    ++made;
    CHECK(oracle::distance(q->source, q->target) == 1);
    CHECK(q->mask == oracle::mask(q->source, q->target));
  }
  CHECK(made > 500);

  const std::vector<std::u32string> combined{U"rn", U"cl"};
  const auto vis = table_of({{U"rn", {U"m"}}, {U"m", {U"rn"}}});
  auto c = gen_substitution(U"corn", vis, ErrorType::VisualCombined, rng, combined);
  REQUIRE(c);
  CHECK(c->source == U"com");
  CHECK(c->mask == U"co_");
  auto d = gen_substitution(U"may", vis, ErrorType::VisualCombined, rng, combined);
  REQUIRE(d);
  CHECK(d->source == U"rnay");
  CHECK(d->mask == oracle::mask(U"rnay", U"may"));
}

TEST_CASE("gen_deletion") {
  Rng rng(2);
  CHECK_FALSE(gen_deletion(U"a", rng));
  std::set<std::u32string> seen;
  for (int i = 0; i < 200; ++i) {
    auto p = gen_deletion(U"word", rng);
    REQUIRE(p);
    CHECK(p->source.size() + 1 == p->target.size());
    CHECK(p->mask == oracle::mask(p->source, p->target));
    seen.insert(p->source);
  }
  CHECK(seen.count(U"wrd"));
  CHECK(seen.size() == 4);
  CHECK(derive_mask(U"wrd", U"word") == U"w_d");
}

TEST_CASE("gen_transposition") {
  Rng rng(4);
  CHECK_FALSE(gen_transposition(U"aaa", rng));
  std::set<std::u32string> seen;
  for (int i = 0; i < 200; ++i) {
    auto p = gen_transposition(U"word", rng);
    REQUIRE(p);
    seen.insert(p->source);
    std::size_t j = 0;
    while (p->source[j] == p->target[j]) ++j;
    CHECK(p->mask[j] == U'_');
    CHECK(p->mask[j + 1] == U'_');
    CHECK(std::count(p->mask.begin(), p->mask.end(), U'_') == 2);
    std::u32string back = p->source;
    std::swap(back[j], back[j + 1]);
    CHECK(back == U"word");
  }
  CHECK(seen.count(U"wrod"));
  CHECK(derive_mask(U"wrod", U"word") == U"w__d");
}

TEST_CASE("gen_insertion") {
  Rng rng(6);
  std::set<std::u32string> seen;
  for (int i = 0; i < 200; ++i) {
    auto p = gen_insertion(U"word", rng);
    REQUIRE(p);
    CHECK(p->source.size() == p->target.size() + 1);
    CHECK(p->mask == oracle::mask(p->source, p->target));
    seen.insert(p->source);
  }
  CHECK(seen.count(U"worrd"));
  CHECK(derive_mask(U"worrd", U"word") == U"wor_d");
  auto a = gen_insertion(U"a", rng);
  REQUIRE(a);
  CHECK(a->source == U"aa");
  CHECK(a->mask == oracle::mask(U"aa", U"a"));

  const auto nb = table_of({{U"o", {U"p"}}});
  bool neighbour = false;
  for (int i = 0; i < 50; ++i) {
    auto p = gen_insertion(U"o", rng, U'_', &nb);
    REQUIRE(p);
    neighbour = neighbour || p->source.find(U'p') != std::u32string::npos;
  }
  CHECK(neighbour);
}

TEST_CASE("gen_split and classify_split") {
  const Lexicon lex(std::vector<std::u32string>{U"foot", U"ball", U"football"});
  CHECK(classify_split(U"foot", U"ball", lex) == ErrorType::SplitBoth);
  CHECK(classify_split(U"fo", U"otball", lex) == ErrorType::SplitRandom);
  CHECK(classify_split(U"foot", U"bal", lex) == ErrorType::SplitLeft);
  CHECK(classify_split(U"foo", U"ball", lex) == ErrorType::SplitRight);
  Rng rng(8);
  CHECK_FALSE(gen_split(U"a", lex, rng));
  for (int i = 0; i < 100; ++i) {
    auto p = gen_split(U"football", lex, rng);
    REQUIRE(p);
    CHECK(std::count(p->mask.begin(), p->mask.end(), U'_') == 1);
    CHECK(p->mask[p->source.find(U' ')] == U'_');
    CHECK(oracle::valid_pair(*p, lex));
  }
  auto both = gen_split_of_kind(U"football", lex, ErrorType::SplitBoth, rng);
  REQUIRE(both);
  CHECK(both->source == U"foot ball");
  CHECK(both->mask == U"foot_ball");
  CHECK_FALSE(gen_split_of_kind(U"ab", lex, ErrorType::SplitBoth, rng));
}

TEST_CASE("gen_runon") {
  const Lexicon lex(std::vector<std::u32string>{U"foot", U"ball"});
  Rng rng(9);
  auto p = gen_runon(U"foot", lex, rng);
  REQUIRE(p);
  CHECK(p->source == U"football");
  CHECK(p->mask == U"foot____");
  CHECK(p->target == U"foot");
  const Lexicon one(std::vector<std::u32string>{U"foot"});
  CHECK_FALSE(gen_runon(U"foot", one, rng));
}

TEST_CASE("load_homonyms") {
  oracle::TempDir dir("homonyms");
  auto pairs = load_homonyms(dir.file("h.txt", "their,there\ntheir,there\nto,too\n"));
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].error_type == ErrorType::Homonym);
  CHECK(pairs[0].mask == derive_mask(U"their", U"there"));
  CHECK(load_homonyms(dir.file("e.txt", "")).empty());
  try {
    load_homonyms(dir.file("bad.txt", "a,b\nnocomma\n"));
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("filter_errors") {
  std::vector<ParallelPair> pairs;
  for (int i = 0; i < 10; ++i) {
    pairs.push_back({std::u32string(static_cast<std::size_t>(i + 1), U'a'), std::u32string(static_cast<std::size_t>(i + 1), U'_'),
                     U"b", ErrorType::TypoDeletion});
  }
  const LengthScorer scorer;
  CHECK(filter_errors(pairs, scorer, 1.0).size() == 10);
  const auto kept = filter_errors(pairs, scorer, 0.9);
  CHECK(kept.size() >= 9);
  CHECK(kept.size() < 10);
  for (auto& p : pairs) p.error_type = ErrorType::Cognitive;
  CHECK(filter_errors(pairs, scorer, 0.5).size() == 10);
  CHECK(percentile_threshold({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.9) == doctest::Approx(9));
}

TEST_CASE("trigram scorer prefers lexicon-like strings") {
  const Lexicon lex = toy_lexicon();
  const TrigramScorer scorer(lex);
  CHECK(scorer.nll_per_char(U"water") < scorer.nll_per_char(U"wqzxr"));
}

TEST_CASE("assemble_corpus") {
  const Lexicon full = toy_lexicon();
  std::vector<std::u32string> first(full.words().begin(), full.words().begin() + 100);
  first.push_back(U"foot");
  first.push_back(U"ball");
  first.push_back(U"football");
  const Lexicon lex(first);
  GenerationTables tables;
  const auto dir = std::string(DPCSPELL_DATA_DIR "/");
  tables.tables[ErrorType::Cognitive] = load_confusion_table(dir + "cognitive.txt");
  tables.tables[ErrorType::VisualSingle] = load_confusion_table(dir + "visual_single.txt");
  tables.tables[ErrorType::VisualCombined] = load_confusion_table(dir + "visual_combined.txt");
  tables.tables[ErrorType::TypoSubstAvro] = load_confusion_table(dir + "typo_avro.txt");
  tables.tables[ErrorType::TypoSubstBijoy] = load_confusion_table(dir + "typo_bijoy.txt");
  tables.combined_units = load_alphabet(dir + "alphabet.txt").combined();
  std::map<ErrorType, std::size_t> quotas;
  for (ErrorType t : kAllErrorTypes) quotas[t] = 50;

  const auto a = assemble_corpus(lex, tables, dir + "homonyms.txt", quotas, 42);
  const auto b = assemble_corpus(lex, tables, dir + "homonyms.txt", quotas, 42);
  CHECK(serialize_corpus(a.pairs) == serialize_corpus(b.pairs));
  CHECK_FALSE(a.pairs.empty());
  for (const auto& p : a.pairs) {
    std::string why;
    const bool ok = oracle::valid_pair(p, lex, &why);
    CHECK_MESSAGE(ok, utf8::encode(p.source) << " -> " << utf8::encode(p.target) << ": " << why);
  }
  CHECK_FALSE(a.report.warnings.empty());  // split_both cannot reach 50 here
  CHECK(a.report.render().find("Total = ") != std::string::npos);

  std::map<ErrorType, std::size_t> zero;
  for (ErrorType t : kAllErrorTypes) zero[t] = 0;
  CHECK(assemble_corpus(lex, tables, std::nullopt, zero, 1).pairs.empty());
}

TEST_CASE("stratified_split") {
  std::vector<ParallelPair> corpus;
  for (int i = 0; i < 100; ++i) {
    corpus.push_back({U"a" + std::u32string(static_cast<std::size_t>(i % 7), U'b'), U"_", U"c", ErrorType::Cognitive});
  }
  for (int i = 0; i < 37; ++i) corpus.push_back({U"x", U"_", U"y", ErrorType::RunOn});
  const CorpusSplit s = stratified_split(corpus, SplitRatios{}, 7);
  auto count = [](const std::vector<ParallelPair>& v, ErrorType t) {
    return std::count_if(v.begin(), v.end(), [t](const ParallelPair& p) { return p.error_type == t; });
  };
  CHECK(count(s.train, ErrorType::Cognitive) == 80);
  CHECK(count(s.validation, ErrorType::Cognitive) == 5);
  CHECK(count(s.test, ErrorType::Cognitive) == 15);
  CHECK(std::abs(count(s.train, ErrorType::RunOn) - 0.80 * 37) <= 1.0);
  CHECK(std::abs(count(s.validation, ErrorType::RunOn) - 0.05 * 37) <= 1.0);
  CHECK(std::abs(count(s.test, ErrorType::RunOn) - 0.15 * 37) <= 1.0);
  CHECK(s.train.size() + s.validation.size() + s.test.size() == corpus.size());

  const CorpusSplit e = stratified_split(std::vector<ParallelPair>{}, SplitRatios{}, 1);
  CHECK(e.train.empty());
  CHECK(e.validation.empty());
  CHECK(e.test.empty());
}

TEST_CASE("stratified_split on the published per-type counts") {
  // per-type instance counts of the full-scale corpus
  const std::vector<std::pair<ErrorType, std::size_t>> counts{
      {ErrorType::Cognitive, 186620},        {ErrorType::Homonym, 123},
      {ErrorType::VisualSingle, 113912},     {ErrorType::VisualCombined, 17313},
      {ErrorType::TypoDeletion, 102550},     {ErrorType::TypoSubstBijoy, 222930},
      {ErrorType::TypoSubstAvro, 174248},    {ErrorType::TypoTransposition, 122939},
      {ErrorType::TypoInsertion, 124767},    {ErrorType::RunOn, 124895},
      {ErrorType::SplitLeft, 51610},         {ErrorType::SplitRight, 13985},
      {ErrorType::SplitRandom, 111974},      {ErrorType::SplitBoth, 12798}};
  std::vector<ParallelPair> corpus;
  std::size_t total = 0;
  for (const auto& [t, n] : counts) total += n;
  REQUIRE(total == 1380664);
  corpus.reserve(total);
  for (const auto& [t, n] : counts) {
    for (std::size_t i = 0; i < n; ++i) corpus.push_back({{}, {}, {}, t});
  }
  const CorpusSplit s = stratified_split(corpus, SplitRatios{}, 1);
  CHECK(std::abs(static_cast<long>(s.train.size()) - 1104531L) <= 14);
  CHECK(std::abs(static_cast<long>(s.validation.size()) - 69034L) <= 14);
  CHECK(std::abs(static_cast<long>(s.test.size()) - 207099L) <= 14);
}

TEST_CASE("corpus CSV round trip") {
  const std::vector<ParallelPair> pairs{
      {U"wprd", U"w_rd", U"word", ErrorType::Cognitive},
      {U"foot ball", U"foot_ball", U"football", ErrorType::SplitBoth},
      {U"a,\"b", U"a,\"_", U"a,\"c", ErrorType::Homonym},
  };
  const std::string text = serialize_corpus(pairs);
  CHECK(text.rfind("source,mask,target,error_type\n", 0) == 0);
  CHECK(text.find("wprd,w_rd,word,cognitive\n") != std::string::npos);
  CHECK(text.find("\"a,\"\"b\"") != std::string::npos);
  CHECK(parse_corpus(text) == pairs);
  oracle::TempDir dir("csv");
  write_corpus(pairs, dir.path() / "c.csv");
  CHECK(read_corpus(dir.path() / "c.csv") == pairs);
  CHECK_THROWS_AS(parse_corpus("source,mask,target,error_type\na,_,b,nonsense\n"), DataError);
  CHECK_THROWS_AS(parse_corpus("source,mask,target,error_type\na,_,b\n"), DataError);
}
