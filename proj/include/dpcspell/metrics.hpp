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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpcspell/charlex.hpp"
#include "dpcspell/corpus_types.hpp"

namespace dpcspell {

struct Prediction {
  std::u32string gold;
  // Ranked candidates; the first one is the prediction.
  std::vector<std::u32string> top_k;
  ErrorType error_type = ErrorType::Cognitive;
};

struct MatchCounts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t matched = 0;
  bool operator==(const MatchCounts&) const = default;
};

// Whitespace tokens of both sides, matched one-to-one by exact equality.
MatchCounts match_sets(std::u32string_view gold, std::u32string_view predicted);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// Pooled over top-1 candidates. Throws UndefinedMetricError when either
// side has no tokens at all (or `preds` is empty).
PrecisionRecall precision_recall(std::span<const Prediction> preds);

// (1 + b^2) P R / (b^2 P + R). P = R = 0 gives 0 and a warning on stderr.
double f_beta(double precision, double recall, double beta);

// Collapses whitespace runs to one space and trims both ends.
std::u32string normalize_spaces(std::u32string_view s);

// Fraction of items whose normalized top-1 equals the normalized gold.
double exact_match(std::span<const Prediction> preds);

enum class MaMode {
  Lexicon,  // a top-K candidate is a lexicon word
  Gold,     // a top-K candidate equals the gold
};

MaMode parse_ma_mode(std::string_view s);  // "lexicon" | "gold"
std::string_view label(MaMode m);

double modified_accuracy(std::span<const Prediction> preds,
                         const Lexicon& lexicon, int k,
                         MaMode mode = MaMode::Lexicon);

struct MetricRow {
  std::string name;
  std::size_t count = 0;
  double em = 0.0;
  double ma = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double f05 = 0.0;
  // Precision/recall had no tokens to count; shown as 0.
  bool undefined_pr = false;
};

struct EvalReport {
  std::vector<MetricRow> rows;  // one per error type present
  MetricRow weighted;           // count-weighted mean of `rows`

  // Aligned table and CSV; columns count, EM, MA, P, R, F1, F0.5.
  std::string to_text() const;
  std::string to_csv() const;
};

EvalReport build_report(std::span<const Prediction> preds,
                        const Lexicon& lexicon, int k,
                        MaMode mode = MaMode::Lexicon);

}  // namespace dpcspell
