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

#include "dpcspell/charlex.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "dpcspell/errors.hpp"
#include "dpcspell/utf8.hpp"
#include "io_util.hpp"

namespace dpcspell {

Alphabet::Alphabet(std::u32string frequent, std::u32string chars,
                   std::vector<std::u32string> combined, char32_t mask_glyph)
    : combined_(std::move(combined)), mask_glyph_(mask_glyph) {
  for (char32_t c : frequent) {
    if (c == mask_glyph_) {
      throw DataError("alphabet: the mask glyph '" + utf8::encode(c) +
                      "' is reserved and cannot be a frequent character");
    }
    if (!frequent_set_.contains(c)) {
      frequent_set_.insert(c);
      frequent_.push_back(c);
    }
  }
  if (!frequent_set_.contains(U' ')) {
    frequent_set_.insert(U' ');
    frequent_.push_back(U' ');
  }
  if (chars.empty()) {
    for (char32_t c : frequent_) {
      if (c != U' ') chars_.push_back(c);
    }
  } else {
    std::unordered_set<char32_t> seen;
    for (char32_t c : chars) {
      if (seen.insert(c).second) chars_.push_back(c);
    }
    for (char32_t c : frequent_) {
      if (c != U' ' && !seen.contains(c)) {
        throw DataError("alphabet: frequent character '" + utf8::encode(c) +
                        "' is missing from the character set");
      }
    }
  }
  for (const auto& unit : combined_) {
    if (unit.size() < 2) {
      throw DataError("alphabet: combined unit '" + utf8::encode(unit) +
                      "' must span at least two code points");
    }
    for (char32_t c : unit) {
      if (!frequent_set_.contains(c)) {
        throw DataError("alphabet: combined unit '" + utf8::encode(unit) +
                        "' uses a non-frequent character");
      }
    }
  }
}

Alphabet Alphabet::ascii_lowercase() {
  return Alphabet(U"abcdefghijklmnopqrstuvwxyz");
}

Alphabet load_alphabet(const std::filesystem::path& path,
                       char32_t mask_glyph) {
  const auto lines = detail::split_lines(detail::read_file(path));
  std::u32string frequent;
  std::u32string chars;
  std::vector<std::u32string> combined;
  enum class Section { Frequent, Chars, Combined } section = Section::Frequent;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::u32string line = utf8::trim(utf8::decode(lines[n]));
    if (line.empty()) continue;
    if (line == U"[combined]") {
      section = Section::Combined;
      continue;
    }
    if (line == U"[chars]") {
      section = Section::Chars;
      continue;
    }
    if (line == U"[frequent]") {
      section = Section::Frequent;
      continue;
    }
    if (section == Section::Combined) {
      combined.push_back(line);
      continue;
    }
    if (line.size() != 1) {
      throw DataError(path.string() + ": expected one character per line",
                      n + 1);
    }
    (section == Section::Frequent ? frequent : chars).push_back(line[0]);
  }
  return Alphabet(std::move(frequent), std::move(chars), std::move(combined),
                  mask_glyph);
}

std::u32string clean_text(std::u32string_view raw, const Alphabet& alphabet) {
  std::u32string out;
  out.reserve(raw.size());
  for (char32_t c : raw) {
    if (alphabet.is_frequent(c)) out.push_back(c);
  }
  return out;
}

Lexicon::Lexicon(const std::vector<std::u32string>& words) {
  for (const auto& w : words) {
    if (w.empty()) continue;
    if (members_.insert(w).second) words_.push_back(w);
  }
}

namespace {

std::u32string unquote_csv_cell(std::u32string line) {
  if (line.size() >= 2 && line.front() == U'"' && line.back() == U'"') {
    std::u32string inner;
    for (std::size_t i = 1; i + 1 < line.size(); ++i) {
      inner.push_back(line[i]);
      if (line[i] == U'"' && i + 2 < line.size() && line[i + 1] == U'"') ++i;
    }
    return inner;
  }
  return line;
}

Lexicon load_wordlist_impl(const std::filesystem::path& path,
                           const Alphabet* alphabet) {
  const auto lines = detail::split_lines(detail::read_file(path));
  std::vector<std::u32string> words;
  words.reserve(lines.size());
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::u32string line;
    try {
      line = utf8::decode(lines[n]);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what(), n + 1);
    }
    line = unquote_csv_cell(utf8::trim(line));
    if (alphabet != nullptr) line = clean_text(line, *alphabet);
    words.push_back(utf8::trim(line));
  }
  Lexicon lexicon(words);
  if (lexicon.empty()) {
    throw EmptyLexiconError(path.string() + ": wordlist yields no words");
  }
  return lexicon;
}

}  // namespace

Lexicon load_wordlist(const std::filesystem::path& path,
                      const Alphabet& alphabet) {
  return load_wordlist_impl(path, &alphabet);
}

Lexicon load_wordlist(const std::filesystem::path& path) {
  return load_wordlist_impl(path, nullptr);
}

Vocab::Vocab(std::u32string_view chars, char32_t mask_glyph)
    : mask_glyph_(mask_glyph) {
  std::set<char32_t> sorted(chars.begin(), chars.end());
  sorted.erase(mask_glyph);
  chars_.assign(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    ids_.emplace(chars_[i], static_cast<TokenId>(kNumSpecials + i));
  }
}

TokenId Vocab::id_of(char32_t c) const {
  if (c == mask_glyph_) return kMask;
  auto it = ids_.find(c);
  return it == ids_.end() ? kUnk : it->second;
}

char32_t Vocab::char_of(TokenId id) const {
  if (id < kNumSpecials || static_cast<std::size_t>(id) >= size()) {
    throw std::out_of_range("token id " + std::to_string(id) +
                            " has no character");
  }
  return chars_[static_cast<std::size_t>(id - kNumSpecials)];
}

std::vector<TokenId> Vocab::encode(std::u32string_view text) const {
  std::vector<TokenId> ids;
  ids.reserve(text.size());
  for (char32_t c : text) ids.push_back(id_of(c));
  return ids;
}

std::u32string Vocab::decode(std::span<const TokenId> ids) const {
  std::u32string out;
  out.reserve(ids.size());
  for (TokenId id : ids) {
    if (id == kMask) {
      out.push_back(mask_glyph_);
    } else if (!is_special(id) && static_cast<std::size_t>(id) < size()) {
      out.push_back(char_of(id));
    }
  }
  return out;
}

std::string_view Vocab::special_name(TokenId id) {
  static constexpr std::string_view kNames[] = {"<pad>", "<sos>",  "<eos>",
                                                "<sep>", "<mask>", "<unk>"};
  if (id < 0 || id >= kNumSpecials) return {};
  return kNames[id];
}

Vocab build_vocab(std::span<const ParallelPair> corpus, char32_t mask_glyph) {
  if (corpus.empty()) throw DataError("build_vocab: empty corpus");
  std::u32string all;
  for (const auto& p : corpus) {
    all += p.source;
    all += p.mask;
    all += p.target;
  }
  return Vocab(all, mask_glyph);
}

}  // namespace dpcspell
