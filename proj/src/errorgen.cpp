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

#include "dpcspell/errorgen.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dpcspell/baseline.hpp"
#include "dpcspell/errors.hpp"
#include "dpcspell/utf8.hpp"
#include "io_util.hpp"

namespace dpcspell {

void ConfusionTable::add(std::u32string key,
                         std::vector<std::u32string> candidates) {
  if (key.empty()) throw DataError("confusion table: empty key");
  if (candidates.empty()) {
    throw DataError("confusion table: key '" + utf8::encode(key) +
                    "' has no candidates");
  }
  for (const auto& c : candidates) {
    if (c.empty() || c == key) {
      throw DataError("confusion table: candidate for '" + utf8::encode(key) +
                      "' must be non-empty and differ from the key");
    }
  }
  auto& slot = entries_[std::move(key)];
  for (auto& c : candidates) {
    if (std::find(slot.begin(), slot.end(), c) == slot.end()) {
      slot.push_back(std::move(c));
    }
  }
}

const std::vector<std::u32string>* ConfusionTable::find(
    std::u32string_view key) const {
  auto it = entries_.find(std::u32string(key));
  return it == entries_.end() ? nullptr : &it->second;
}

void ConfusionTable::validate(const Alphabet& alphabet) const {
  const auto& combined = alphabet.combined();
  for (const auto& [key, cands] : entries_) {
    for (const auto& c : cands) {
      const bool ok =
          (c.size() == 1 && alphabet.is_frequent(c[0])) ||
          std::find(combined.begin(), combined.end(), c) != combined.end();
      if (!ok) {
        throw DataError("confusion table: candidate '" + utf8::encode(c) +
                        "' for '" + utf8::encode(key) +
                        "' is neither a frequent character nor a combined "
                        "unit");
      }
    }
  }
}

ConfusionTable load_confusion_table(const std::filesystem::path& path) {
  const auto lines = detail::split_lines(detail::read_file(path));
  ConfusionTable table;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::u32string line = utf8::trim(utf8::decode(lines[n]));
    if (line.empty() || line[0] == U'#') continue;
    // The key may itself be ':' so search from index 1.
    const auto colon = line.find(U':', 1);
    if (colon == std::u32string::npos) {
      throw DataError(path.string() + ": expected key:cand1,cand2,...", n + 1);
    }
    std::u32string key = utf8::trim(line.substr(0, colon));
    std::vector<std::u32string> cands;
    std::u32string rest = line.substr(colon + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto comma = rest.find(U',', start);
      if (comma == std::u32string::npos) comma = rest.size();
      std::u32string cand = utf8::trim(rest.substr(start, comma - start));
      if (!cand.empty()) cands.push_back(std::move(cand));
      start = comma + 1;
    }
    try {
      table.add(std::move(key), std::move(cands));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what(), n + 1);
    }
  }
  return table;
}

std::vector<std::u32string> segment_units(
    std::u32string_view word, std::span<const std::u32string> combined) {
  std::vector<std::u32string> units;
  std::size_t i = 0;
  while (i < word.size()) {
    std::size_t best = 1;
    for (const auto& unit : combined) {
      if (unit.size() > best && word.substr(i, unit.size()) == unit) {
        best = unit.size();
      }
    }
    units.emplace_back(word.substr(i, best));
    i += best;
  }
  return units;
}

std::u32string derive_mask(std::u32string_view source,
                           std::u32string_view target, char32_t glyph) {
  std::u32string mask(source);
  if (source.empty()) return mask;
  const Alignment al = levenshtein(source, target);
  std::size_t cursor = 0;
  const std::size_t last = source.size() - 1;
  for (const Edit& e : al.script.edits) {
    switch (e.op) {
      case EditOp::Keep:
        ++cursor;
        break;
      case EditOp::Substitute:
      case EditOp::DeleteSource:
        mask[static_cast<std::size_t>(e.source_index)] = glyph;
        ++cursor;
        break;
      case EditOp::InsertTarget:
        mask[std::min(cursor, last)] = glyph;
        break;
    }
  }
  return mask;
}

std::optional<ParallelPair> gen_substitution(
    std::u32string_view word, const ConfusionTable& table, ErrorType kind,
    Rng& rng, std::span<const std::u32string> combined, char32_t glyph) {
  const auto units = segment_units(
      word, kind == ErrorType::VisualCombined
                ? combined
                : std::span<const std::u32string>{});
  std::vector<std::size_t> keyed;
  for (std::size_t u = 0; u < units.size(); ++u) {
    if (table.find(units[u]) != nullptr) keyed.push_back(u);
  }
  if (keyed.empty()) return std::nullopt;
  const std::size_t pick = keyed[rng.uniform_index(keyed.size())];
  const auto& cands = *table.find(units[pick]);
  const std::u32string& replacement = cands[rng.uniform_index(cands.size())];

  ParallelPair pair;
  pair.target = std::u32string(word);
  pair.error_type = kind;
  for (std::size_t u = 0; u < units.size(); ++u) {
    if (u == pick) {
      pair.source += replacement;
      pair.mask.append(replacement.size(), glyph);
    } else {
      pair.source += units[u];
      pair.mask += units[u];
    }
  }
  return pair;
}

std::optional<ParallelPair> gen_deletion(std::u32string_view word, Rng& rng,
                                         char32_t glyph) {
  if (word.size() < 2) return std::nullopt;
  const std::size_t i = rng.uniform_index(word.size());
  ParallelPair pair;
  pair.source = std::u32string(word.substr(0, i)) +
                std::u32string(word.substr(i + 1));
  pair.target = std::u32string(word);
  pair.mask = derive_mask(pair.source, pair.target, glyph);
  pair.error_type = ErrorType::TypoDeletion;
  return pair;
}

std::optional<ParallelPair> gen_transposition(std::u32string_view word,
                                              Rng& rng, char32_t glyph) {
  std::vector<std::size_t> swappable;
  for (std::size_t i = 0; i + 1 < word.size(); ++i) {
    if (word[i] != word[i + 1]) swappable.push_back(i);
  }
  if (swappable.empty()) return std::nullopt;
  const std::size_t i = swappable[rng.uniform_index(swappable.size())];
  ParallelPair pair;
  pair.source = std::u32string(word);
  std::swap(pair.source[i], pair.source[i + 1]);
  pair.mask = pair.source;
  pair.mask[i] = glyph;
  pair.mask[i + 1] = glyph;
  pair.target = std::u32string(word);
  pair.error_type = ErrorType::TypoTransposition;
  return pair;
}

std::optional<ParallelPair> gen_insertion(std::u32string_view word, Rng& rng,
                                          char32_t glyph,
                                          const ConfusionTable* neighbors) {
  if (word.empty()) return std::nullopt;
  const std::size_t i = rng.uniform_index(word.size());
  std::u32string inserted(1, word[i]);
  if (neighbors != nullptr) {
    if (const auto* cands = neighbors->find(word.substr(i, 1))) {
      inserted = (*cands)[rng.uniform_index(cands->size())];
    }
  }
  ParallelPair pair;
  pair.source = std::u32string(word.substr(0, i + 1)) + inserted +
                std::u32string(word.substr(i + 1));
  pair.target = std::u32string(word);
  pair.mask = derive_mask(pair.source, pair.target, glyph);
  pair.error_type = ErrorType::TypoInsertion;
  return pair;
}

ErrorType classify_split(std::u32string_view left, std::u32string_view right,
                         const Lexicon& lexicon) {
  const bool l = lexicon.contains(left);
  const bool r = lexicon.contains(right);
  if (l && r) return ErrorType::SplitBoth;
  if (l) return ErrorType::SplitLeft;
  if (r) return ErrorType::SplitRight;
  return ErrorType::SplitRandom;
}

namespace {

ParallelPair make_split(std::u32string_view word, std::size_t pos,
                        ErrorType kind, char32_t glyph) {
  ParallelPair pair;
  const std::u32string left(word.substr(0, pos));
  const std::u32string right(word.substr(pos));
  pair.source = left + U" " + right;
  pair.mask = left + std::u32string(1, glyph) + right;
  pair.target = std::u32string(word);
  pair.error_type = kind;
  return pair;
}

}  // namespace

std::optional<ParallelPair> gen_split(std::u32string_view word,
                                      const Lexicon& lexicon, Rng& rng,
                                      char32_t glyph) {
  if (word.size() < 2) return std::nullopt;
  const std::size_t pos = 1 + rng.uniform_index(word.size() - 1);
  return make_split(
      word, pos,
      classify_split(word.substr(0, pos), word.substr(pos), lexicon), glyph);
}

std::optional<ParallelPair> gen_split_of_kind(std::u32string_view word,
                                              const Lexicon& lexicon,
                                              ErrorType kind, Rng& rng,
                                              char32_t glyph) {
  if (word.size() < 2) return std::nullopt;
  std::vector<std::size_t> positions;
  for (std::size_t pos = 1; pos < word.size(); ++pos) {
    if (classify_split(word.substr(0, pos), word.substr(pos), lexicon) ==
        kind) {
      positions.push_back(pos);
    }
  }
  if (positions.empty()) return std::nullopt;
  return make_split(word, positions[rng.uniform_index(positions.size())],
                    kind, glyph);
}

std::optional<ParallelPair> gen_runon(std::u32string_view word,
                                      const Lexicon& lexicon, Rng& rng,
                                      char32_t glyph) {
  const auto& words = lexicon.words();
  if (words.size() < 2) return std::nullopt;
  // Uniform over lexicon entries other than `word`.
  const auto self = std::find(words.begin(), words.end(), word);
  const std::size_t others =
      self == words.end() ? words.size() : words.size() - 1;
  std::size_t j = rng.uniform_index(others);
  if (self != words.end() &&
      j >= static_cast<std::size_t>(self - words.begin())) {
    ++j;
  }
  const std::u32string& appended = words[j];
  ParallelPair pair;
  pair.source = std::u32string(word) + appended;
  pair.mask = std::u32string(word) + std::u32string(appended.size(), glyph);
  pair.target = std::u32string(word);
  pair.error_type = ErrorType::RunOn;
  return pair;
}

std::vector<ParallelPair> load_homonyms(const std::filesystem::path& path,
                                        char32_t glyph) {
  const auto lines = detail::split_lines(detail::read_file(path));
  std::vector<ParallelPair> pairs;
  std::set<std::pair<std::u32string, std::u32string>> seen;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::u32string line;
    try {
      line = utf8::trim(utf8::decode(lines[n]));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what(), n + 1);
    }
    if (line.empty()) continue;
    const auto comma = line.find(U',');
    if (comma == std::u32string::npos ||
        line.find(U',', comma + 1) != std::u32string::npos) {
      throw DataError(path.string() + ": expected wrong,correct", n + 1);
    }
    std::u32string wrong = utf8::trim(line.substr(0, comma));
    std::u32string correct = utf8::trim(line.substr(comma + 1));
    if (wrong.empty() || correct.empty() || wrong == correct) {
      throw DataError(
          path.string() + ": homonym pair needs two distinct non-empty words",
          n + 1);
    }
    if (!seen.emplace(wrong, correct).second) continue;
    ParallelPair pair;
    pair.mask = derive_mask(wrong, correct, glyph);
    pair.source = std::move(wrong);
    pair.target = std::move(correct);
    pair.error_type = ErrorType::Homonym;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

namespace {

constexpr char32_t kBoundary = U'\x02';

}  // namespace

TrigramScorer::TrigramScorer(const Lexicon& lexicon) {
  std::set<char32_t> symbols;
  for (const auto& w : lexicon.words()) {
    const std::u32string padded =
        std::u32string(2, kBoundary) + w + std::u32string(1, kBoundary);
    for (char32_t c : w) symbols.insert(c);
    for (std::size_t i = 2; i < padded.size(); ++i) {
      ++trigram_counts_[padded.substr(i - 2, 3)];
      ++context_counts_[padded.substr(i - 2, 2)];
    }
  }
  vocab_size_ = symbols.size() + 1;
}

double TrigramScorer::nll_per_char(std::u32string_view word) const {
  const std::u32string padded = std::u32string(2, kBoundary) +
                                std::u32string(word) +
                                std::u32string(1, kBoundary);
  double nll = 0.0;
  std::size_t events = 0;
  for (std::size_t i = 2; i < padded.size(); ++i) {
    const auto tri = trigram_counts_.find(padded.substr(i - 2, 3));
    const auto ctx = context_counts_.find(padded.substr(i - 2, 2));
    const double num = 1.0 + (tri == trigram_counts_.end() ? 0 : tri->second);
    const double den = static_cast<double>(vocab_size_) +
                       (ctx == context_counts_.end() ? 0 : ctx->second);
    nll -= std::log(num / den);
    ++events;
  }
  return nll / static_cast<double>(events);
}

double TrigramScorer::score(const ParallelPair& pair) const {
  return nll_per_char(pair.source);
}

bool is_filtered_type(ErrorType t) {
  return t == ErrorType::TypoDeletion || t == ErrorType::TypoSubstAvro ||
         t == ErrorType::TypoSubstBijoy;
}

double percentile_threshold(std::vector<double> scores, double fraction) {
  if (scores.empty()) throw std::invalid_argument("percentile of no scores");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("percentile must lie in (0, 1]");
  }
  std::sort(scores.begin(), scores.end());
  const double raw = fraction * static_cast<double>(scores.size());
  auto rank = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, scores.size());
  return scores[rank - 1];
}

std::vector<ParallelPair> filter_errors(std::span<const ParallelPair> pairs,
                                        const PlausibilityScorer& scorer,
                                        double percentile) {
  if (!(percentile > 0.0 && percentile <= 1.0)) {
    throw std::invalid_argument("percentile must lie in (0, 1]");
  }
  std::vector<double> scores(pairs.size(), 0.0);
  std::map<ErrorType, std::vector<double>> by_type;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!is_filtered_type(pairs[i].error_type)) continue;
    scores[i] = scorer.score(pairs[i]);
    by_type[pairs[i].error_type].push_back(scores[i]);
  }
  std::map<ErrorType, double> threshold;
  for (auto& [type, s] : by_type) {
    threshold[type] = percentile_threshold(std::move(s), percentile);
  }
  std::vector<ParallelPair> kept;
  kept.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const ErrorType t = pairs[i].error_type;
    if (!is_filtered_type(t) || scores[i] <= threshold[t]) {
      kept.push_back(pairs[i]);
    }
  }
  return kept;
}

std::size_t GenerationReport::total() const {
  std::size_t n = 0;
  for (const auto& [t, c] : produced) n += c;
  return n;
}

std::string GenerationReport::render() const {
  std::ostringstream out;
  const std::size_t all = total();
  out << std::left << std::setw(38) << "Error Type" << std::right
      << std::setw(12) << "Instances" << std::setw(12) << "Percentage"
      << std::setw(12) << "Requested" << std::setw(12) << "Filtered"
      << "\n";
  for (ErrorType t : kAllErrorTypes) {
    const auto get = [t](const std::map<ErrorType, std::size_t>& m) {
      auto it = m.find(t);
      return it == m.end() ? std::size_t{0} : it->second;
    };
    const std::size_t n = get(produced);
    const double pct =
        all == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(all);
    std::ostringstream pct_text;
    pct_text << std::fixed << std::setprecision(2) << pct << "%";
    out << std::left << std::setw(38) << display_name(t) << std::right
        << std::setw(12) << n << std::setw(12) << pct_text.str()
        << std::setw(12) << get(requested) << std::setw(12)
        << get(filtered_out) << "\n";
  }
  out << "Total = " << all << "\n";
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  return out.str();
}

GeneratedCorpus assemble_corpus(
    const Lexicon& lexicon, const GenerationTables& tables,
    const std::optional<std::filesystem::path>& homonym_path,
    const std::map<ErrorType, std::size_t>& quotas, std::uint64_t seed) {
  GeneratedCorpus out;
  const char32_t glyph = tables.mask_glyph;
  for (ErrorType type : kAllErrorTypes) {
    const auto q = quotas.find(type);
    const std::size_t quota = q == quotas.end() ? 0 : q->second;
    out.report.requested[type] = quota;
    out.report.produced[type] = 0;
    if (quota == 0) continue;

    Rng rng(seed ^ static_cast<std::uint64_t>(index_of(type)));
    std::vector<ParallelPair> made;

    if (type == ErrorType::Homonym) {
      if (!homonym_path) {
        out.report.warnings.push_back(
            "homonym quota requested but no homonym file configured");
        continue;
      }
      made = load_homonyms(*homonym_path, glyph);
      rng.shuffle(made);
      if (made.size() > quota) made.resize(quota);
    } else {
      const ConfusionTable* table = nullptr;
      const bool substitution =
          type == ErrorType::Cognitive || type == ErrorType::VisualSingle ||
          type == ErrorType::VisualCombined ||
          type == ErrorType::TypoSubstAvro || type == ErrorType::TypoSubstBijoy;
      if (substitution) {
        auto it = tables.tables.find(type);
        if (it == tables.tables.end() || it->second.empty()) {
          out.report.warnings.push_back(std::string(label(type)) +
                                        ": no confusion table configured");
          continue;
        }
        table = &it->second;
      }
      std::vector<std::size_t> order(lexicon.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(order);
      const ConfusionTable* neighbors =
          tables.insertion_neighbors ? &*tables.insertion_neighbors : nullptr;
      for (std::size_t idx : order) {
        if (made.size() >= quota) break;
        const std::u32string& word = lexicon.words()[idx];
        std::optional<ParallelPair> pair;
        switch (type) {
          case ErrorType::Cognitive:
          case ErrorType::VisualSingle:
          case ErrorType::VisualCombined:
          case ErrorType::TypoSubstAvro:
          case ErrorType::TypoSubstBijoy:
            pair = gen_substitution(word, *table, type, rng,
                                    tables.combined_units, glyph);
            break;
          case ErrorType::TypoDeletion:
            pair = gen_deletion(word, rng, glyph);
            break;
          case ErrorType::TypoTransposition:
            pair = gen_transposition(word, rng, glyph);
            break;
          case ErrorType::TypoInsertion:
            pair = gen_insertion(word, rng, glyph, neighbors);
            break;
          case ErrorType::RunOn:
            pair = gen_runon(word, lexicon, rng, glyph);
            break;
          case ErrorType::SplitLeft:
          case ErrorType::SplitRight:
          case ErrorType::SplitRandom:
          case ErrorType::SplitBoth:
            pair = gen_split_of_kind(word, lexicon, type, rng, glyph);
            break;
          case ErrorType::Homonym:
            break;
        }
        if (pair) made.push_back(std::move(*pair));
      }
    }
    if (made.size() < quota) {
      out.report.warnings.push_back(
          std::string(label(type)) + ": quota " + std::to_string(quota) +
          " unreachable, produced " + std::to_string(made.size()));
    }
    out.report.produced[type] = made.size();
    out.pairs.insert(out.pairs.end(), std::make_move_iterator(made.begin()),
                     std::make_move_iterator(made.end()));
  }
  return out;
}

CorpusSplit stratified_split(std::span<const ParallelPair> corpus,
                             SplitRatios ratios, std::uint64_t seed) {
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must be non-negative and sum to 1");
  }
  std::array<std::vector<std::size_t>, kNumErrorTypes> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    groups[index_of(corpus[i].error_type)].push_back(i);
  }
  CorpusSplit split;
  for (std::size_t t = 0; t < kNumErrorTypes; ++t) {
    auto& idx = groups[t];
    if (idx.empty()) continue;
    Rng rng(mix_seed(seed, t));
    rng.shuffle(idx);
    const auto n = static_cast<double>(idx.size());
    auto n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
    auto n_val = static_cast<std::size_t>(std::llround(ratios.validation * n));
    n_train = std::min(n_train, idx.size());
    n_val = std::min(n_val, idx.size() - n_train);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const ParallelPair& p = corpus[idx[k]];
      if (k < n_train) {
        split.train.push_back(p);
      } else if (k < n_train + n_val) {
        split.validation.push_back(p);
      } else {
        split.test.push_back(p);
      }
    }
  }
  return split;
}

namespace {

constexpr std::string_view kHeader = "source,mask,target,error_type";

void append_field(std::string& out, const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    out += field;
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

std::string serialize_corpus(std::span<const ParallelPair> pairs) {
  std::string out(kHeader);
  out.push_back('\n');
  for (const auto& p : pairs) {
    append_field(out, utf8::encode(p.source));
    out.push_back(',');
    append_field(out, utf8::encode(p.mask));
    out.push_back(',');
    append_field(out, utf8::encode(p.target));
    out.push_back(',');
    out += label(p.error_type);
    out.push_back('\n');
  }
  return out;
}

std::vector<ParallelPair> parse_corpus(const std::string& text,
                                       const std::string& origin) {
  std::vector<ParallelPair> pairs;
  std::size_t pos = 0;
  std::size_t line = 1;
  bool header_seen = false;
  while (pos < text.size()) {
    const std::size_t row_line = line;
    std::vector<std::string> fields(1);
    bool quoted = false;
    bool row_done = false;
    while (pos < text.size() && !row_done) {
      const char c = text[pos];
      if (quoted) {
        if (c == '"') {
          if (pos + 1 < text.size() && text[pos + 1] == '"') {
            fields.back().push_back('"');
            ++pos;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line;
          fields.back().push_back(c);
        }
      } else if (c == '"') {
        if (!fields.back().empty()) {
          throw DataError(origin + ": stray quote", row_line);
        }
        quoted = true;
      } else if (c == ',') {
        fields.emplace_back();
      } else if (c == '\n') {
        ++line;
        row_done = true;
      } else if (c != '\r') {
        fields.back().push_back(c);
      }
      ++pos;
    }
    if (quoted) throw DataError(origin + ": unterminated quote", row_line);
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (!header_seen) {
      std::string joined;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        joined += (i ? "," : "") + fields[i];
      }
      if (joined != kHeader) {
        throw DataError(origin + ": expected header '" + std::string(kHeader) +
                            "'",
                        row_line);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) {
      throw DataError(origin + ": expected 4 fields, got " +
                          std::to_string(fields.size()),
                      row_line);
    }
    ParallelPair p;
    try {
      p.source = utf8::decode(fields[0]);
      p.mask = utf8::decode(fields[1]);
      p.target = utf8::decode(fields[2]);
      p.error_type = parse_error_type(fields[3]);
    } catch (const DataError& e) {
      throw DataError(origin + ": " + e.what(), row_line);
    }
    if (p.mask.size() != p.source.size()) {
      throw DataError(origin + ": mask length differs from source length",
                      row_line);
    }
    pairs.push_back(std::move(p));
  }
  if (!header_seen) throw DataError(origin + ": missing header", 1);
  return pairs;
}

void write_corpus(std::span<const ParallelPair> pairs,
                  const std::filesystem::path& path) {
  detail::write_file(path, serialize_corpus(pairs));
}

std::vector<ParallelPair> read_corpus(const std::filesystem::path& path) {
  return parse_corpus(detail::read_file(path), path.string());
}

}  // namespace dpcspell
