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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpcspell/charlex.hpp"
#include "dpcspell/corpus_types.hpp"
#include "dpcspell/rng.hpp"

namespace dpcspell {

// Map from a correct unit P_n to its plausible wrong replacements L_n.
// Keys and candidates are single code points or combined units.
class ConfusionTable {
 public:
  // Throws DataError if `candidates` is empty or contains `key`.
  void add(std::u32string key, std::vector<std::u32string> candidates);

  const std::vector<std::u32string>* find(std::u32string_view key) const;
  const std::map<std::u32string, std::vector<std::u32string>>& entries()
      const {
    return entries_;
  }
  bool empty() const { return entries_.empty(); }

  // Every candidate must be a frequent character or a combined unit.
  void validate(const Alphabet& alphabet) const;

 private:
  std::map<std::u32string, std::vector<std::u32string>> entries_;
};

// `key:cand1,cand2,...` per line; blank lines and lines starting with '#'
// are skipped.
ConfusionTable load_confusion_table(const std::filesystem::path& path);

// Splits a word into units: combined units (longest match first) are atomic,
// everything else is one code point.
std::vector<std::u32string> segment_units(
    std::u32string_view word, std::span<const std::u32string> combined);

// Masks `source` against `target`: copy of the source with the glyph at every
// substituted or deleted source position and, for each target-only insertion,
// at the source cursor (clamped to the last index). Alignment is the
// Levenshtein script of align_sequences.
std::u32string derive_mask(std::u32string_view source,
                           std::u32string_view target,
                           char32_t glyph = kDefaultMaskGlyph);

// Replaces one occurrence of one key unit with a uniformly chosen candidate.
// Covers Cognitive, VisualSingle, VisualCombined and both keyboard
// substitutions; VisualCombined segments the word with `combined` units.
std::optional<ParallelPair> gen_substitution(
    std::u32string_view word, const ConfusionTable& table, ErrorType kind,
    Rng& rng, std::span<const std::u32string> combined = {},
    char32_t glyph = kDefaultMaskGlyph);

std::optional<ParallelPair> gen_deletion(std::u32string_view word, Rng& rng,
                                         char32_t glyph = kDefaultMaskGlyph);

std::optional<ParallelPair> gen_transposition(
    std::u32string_view word, Rng& rng, char32_t glyph = kDefaultMaskGlyph);

// Duplicates one character in place. With `neighbors`, inserts a keyboard
// neighbour of the chosen character instead (falling back to duplication
// when it has none).
std::optional<ParallelPair> gen_insertion(
    std::u32string_view word, Rng& rng, char32_t glyph = kDefaultMaskGlyph,
    const ConfusionTable* neighbors = nullptr);

// Classification of a split of `word` at `pos` (1 <= pos < len).
ErrorType classify_split(std::u32string_view left, std::u32string_view right,
                         const Lexicon& lexicon);

std::optional<ParallelPair> gen_split(std::u32string_view word,
                                      const Lexicon& lexicon, Rng& rng,
                                      char32_t glyph = kDefaultMaskGlyph);

// Uniform over the split positions whose classification equals `kind`.
std::optional<ParallelPair> gen_split_of_kind(
    std::u32string_view word, const Lexicon& lexicon, ErrorType kind, Rng& rng,
    char32_t glyph = kDefaultMaskGlyph);

std::optional<ParallelPair> gen_runon(std::u32string_view word,
                                      const Lexicon& lexicon, Rng& rng,
                                      char32_t glyph = kDefaultMaskGlyph);

// `wrong,correct` per line; duplicates removed. Throws DataError with the
// line number on malformed rows.
std::vector<ParallelPair> load_homonyms(const std::filesystem::path& path,
                                        char32_t glyph = kDefaultMaskGlyph);

// Lower score = more plausible.
class PlausibilityScorer {
 public:
  virtual ~PlausibilityScorer() = default;
  virtual double score(const ParallelPair& pair) const = 0;
};

// Character trigram model with add-one smoothing; scores the mean negative
// log-likelihood per character of the erroneous source.
class TrigramScorer final : public PlausibilityScorer {
 public:
  explicit TrigramScorer(const Lexicon& lexicon);
  double score(const ParallelPair& pair) const override;
  double nll_per_char(std::u32string_view word) const;

 private:
  std::map<std::u32string, std::uint32_t> trigram_counts_;
  std::map<std::u32string, std::uint32_t> context_counts_;
  std::size_t vocab_size_ = 1;
};

// Types affected by filtration.
bool is_filtered_type(ErrorType t);

// Nearest-rank percentile of `scores` (sorted copy; 0 < fraction <= 1).
double percentile_threshold(std::vector<double> scores, double fraction);

// Drops TypoDeletion / TypoSubstAvro / TypoSubstBijoy pairs scoring above
// their type's percentile. Other types pass through. Order is preserved.
std::vector<ParallelPair> filter_errors(std::span<const ParallelPair> pairs,
                                        const PlausibilityScorer& scorer,
                                        double percentile);

struct GenerationTables {
  std::map<ErrorType, ConfusionTable> tables;
  std::vector<std::u32string> combined_units;
  // Optional keyboard-neighbour insertion.
  std::optional<ConfusionTable> insertion_neighbors;
  char32_t mask_glyph = kDefaultMaskGlyph;
};

struct GenerationReport {
  std::map<ErrorType, std::size_t> requested;
  std::map<ErrorType, std::size_t> produced;
  std::map<ErrorType, std::size_t> filtered_out;
  std::vector<std::string> warnings;

  std::size_t total() const;
  // Plain-text table: type, instances, percentage, followed by warnings.
  std::string render() const;
};

struct GeneratedCorpus {
  std::vector<ParallelPair> pairs;
  GenerationReport report;
};

// Per type (in enum order), shuffles the lexicon with seed ^ type-index and
// applies the matching generator until the quota is met. Missing quotas
// count as zero.
GeneratedCorpus assemble_corpus(
    const Lexicon& lexicon, const GenerationTables& tables,
    const std::optional<std::filesystem::path>& homonym_path,
    const std::map<ErrorType, std::size_t>& quotas, std::uint64_t seed);

struct CorpusSplit {
  std::vector<ParallelPair> train;
  std::vector<ParallelPair> validation;
  std::vector<ParallelPair> test;
};

struct SplitRatios {
  double train = 0.80;
  double validation = 0.05;
  double test = 0.15;
};

// Per type: seeded shuffle, then contiguous cut with rounded sizes.
CorpusSplit stratified_split(std::span<const ParallelPair> corpus,
                             SplitRatios ratios, std::uint64_t seed);

// Header `source,mask,target,error_type`; RFC 4180 quoting.
std::string serialize_corpus(std::span<const ParallelPair> pairs);
std::vector<ParallelPair> parse_corpus(const std::string& text,
                                       const std::string& origin = "corpus");
void write_corpus(std::span<const ParallelPair> pairs,
                  const std::filesystem::path& path);
std::vector<ParallelPair> read_corpus(const std::filesystem::path& path);

}  // namespace dpcspell
