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

#include "dpcspell/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>

#include "dpcspell/errors.hpp"
#include "dpcspell/utf8.hpp"

namespace dpcspell {

namespace {

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0x00A0 || c == 0x3000;
}

std::vector<std::u32string> tokens(std::u32string_view s) {
  std::vector<std::u32string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

const std::u32string& top1(const Prediction& p) {
  if (p.top_k.empty()) throw DataError("prediction has no candidates");
  return p.top_k.front();
}

}  // namespace

MatchCounts match_sets(std::u32string_view gold, std::u32string_view predicted) {
  const auto g = tokens(gold);
  const auto e = tokens(predicted);
  std::map<std::u32string, std::size_t> left;
  for (const auto& t : g) ++left[t];
  MatchCounts m{g.size(), e.size(), 0};
  for (const auto& t : e) {
    auto it = left.find(t);
    if (it != left.end() && it->second > 0) {
      --it->second;
      ++m.matched;
    }
  }
  return m;
}

PrecisionRecall precision_recall(std::span<const Prediction> preds) {
  if (preds.empty()) throw UndefinedMetricError("precision/recall of no predictions");
  std::size_t g = 0, e = 0, hit = 0;
  for (const Prediction& p : preds) {
    const MatchCounts m = match_sets(p.gold, top1(p));
    g += m.gold;
    e += m.predicted;
    hit += m.matched;
  }
  if (e == 0) throw UndefinedMetricError("precision undefined: predictions contain no tokens");
  if (g == 0) throw UndefinedMetricError("recall undefined: gold contains no tokens");
  return {static_cast<double>(hit) / e, static_cast<double>(hit) / g};
}

double f_beta(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double den = b2 * precision + recall;
  if (den == 0.0) {
    std::cerr << "warning: F-score with precision = recall = 0 set to 0\n";
    return 0.0;
  }
  return (1.0 + b2) * precision * recall / den;
}

std::u32string normalize_spaces(std::u32string_view s) {
  std::u32string out;
  for (const auto& t : tokens(s)) {
    if (!out.empty()) out.push_back(U' ');
    out += t;
  }
  return out;
}

double exact_match(std::span<const Prediction> preds) {
  if (preds.empty()) throw UndefinedMetricError("exact match of no predictions");
  std::size_t n = 0;
  for (const Prediction& p : preds) {
    if (normalize_spaces(top1(p)) == normalize_spaces(p.gold)) ++n;
  }
  return static_cast<double>(n) / preds.size();
}

MaMode parse_ma_mode(std::string_view s) {
  if (s == "lexicon") return MaMode::Lexicon;
  if (s == "gold") return MaMode::Gold;
  throw UsageError("MA mode must be 'lexicon' or 'gold', got '" + std::string(s) + "'");
}

std::string_view label(MaMode m) { return m == MaMode::Gold ? "gold" : "lexicon"; }

double modified_accuracy(std::span<const Prediction> preds,
                         const Lexicon& lexicon, int k, MaMode mode) {
  if (preds.empty()) throw UndefinedMetricError("modified accuracy of no predictions");
  if (k < 1) throw UsageError("K must be at least 1");
  std::size_t n = 0;
  for (const Prediction& p : preds) {
    top1(p);
    const std::size_t limit = std::min(p.top_k.size(), static_cast<std::size_t>(k));
    const std::u32string gold = normalize_spaces(p.gold);
    for (std::size_t i = 0; i < limit; ++i) {
      const bool ok = mode == MaMode::Lexicon
                          ? lexicon.contains(p.top_k[i])
                          : normalize_spaces(p.top_k[i]) == gold;
      if (ok) {
        ++n;
        break;
      }
    }
  }
  return static_cast<double>(n) / preds.size();
}

namespace {

MetricRow make_row(std::string name, std::span<const Prediction> preds,
                   const Lexicon& lexicon, int k, MaMode mode) {
  MetricRow row;
  row.name = std::move(name);
  row.count = preds.size();
  row.em = exact_match(preds);
  row.ma = modified_accuracy(preds, lexicon, k, mode);
  try {
    const PrecisionRecall pr = precision_recall(preds);
    row.precision = pr.precision;
    row.recall = pr.recall;
  } catch (const UndefinedMetricError&) {
    row.undefined_pr = true;
  }
  if (row.precision + row.recall > 0.0) {
    row.f1 = f_beta(row.precision, row.recall, 1.0);
    row.f05 = f_beta(row.precision, row.recall, 0.5);
  }
  return row;
}

}  // namespace

EvalReport build_report(std::span<const Prediction> preds,
                        const Lexicon& lexicon, int k, MaMode mode) {
  if (preds.empty()) throw UndefinedMetricError("report over no predictions");
  EvalReport report;
  for (ErrorType t : kAllErrorTypes) {
    std::vector<Prediction> group;
    for (const Prediction& p : preds) {
      if (p.error_type == t) group.push_back(p);
    }
    if (!group.empty()) {
      report.rows.push_back(make_row(std::string(display_name(t)), group, lexicon, k, mode));
    }
  }
  MetricRow& w = report.weighted;
  w.name = "Weighted Average";
  for (const MetricRow& r : report.rows) w.count += r.count;
  for (const MetricRow& r : report.rows) {
    const double f = static_cast<double>(r.count) / static_cast<double>(w.count);
    w.em += f * r.em;
    w.ma += f * r.ma;
    w.precision += f * r.precision;
    w.recall += f * r.recall;
    w.f1 += f * r.f1;
    w.f05 += f * r.f05;
    w.undefined_pr = w.undefined_pr || r.undefined_pr;
  }
  return report;
}

std::string EvalReport::to_text() const {
  std::size_t width = std::max<std::size_t>(10, utf8::decode(weighted.name).size());
  for (const MetricRow& r : rows) width = std::max(width, utf8::decode(r.name).size());
  std::string out;
  char buf[256];
  auto line = [&](const MetricRow& r) {
    std::string name = r.name;
    name.append(width - utf8::decode(r.name).size(), ' ');
    std::snprintf(buf, sizeof buf, "  %7zu  %6.4f  %6.4f  %6.4f  %6.4f  %6.4f  %6.4f%s\n",
                  r.count, r.em, r.ma, r.precision, r.recall, r.f1, r.f05,
                  r.undefined_pr ? "  (P/R undefined)" : "");
    out += name + buf;
  };
  std::string head = "type";
  head.append(width - 4, ' ');
  out += head + "    count      EM      MA       P       R      F1    F0.5\n";
  for (const MetricRow& r : rows) line(r);
  line(weighted);
  return out;
}

std::string EvalReport::to_csv() const {
  std::string out = "type,count,EM,MA,P,R,F1,F0.5\n";
  char buf[256];
  auto line = [&](const MetricRow& r) {
    std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.count,
                  r.em, r.ma, r.precision, r.recall, r.f1, r.f05);
    out += "\"" + r.name + "\"" + buf;
  };
  for (const MetricRow& r : rows) line(r);
  line(weighted);
  return out;
}

}  // namespace dpcspell
