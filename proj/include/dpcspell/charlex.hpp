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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dpcspell/corpus_types.hpp"

namespace dpcspell {

// Character inventory of a script.
//
// `chars` is the full character set; `frequent` is the retained set used for
// cleaning and always contains the space character. `combined` lists
// multi-code-point units (conjuncts) that the visual-combined generator treats
// as atomic. The mask glyph is reserved and may not appear in `frequent`.
class Alphabet {
 public:
  Alphabet(std::u32string frequent, std::u32string chars = {},
           std::vector<std::u32string> combined = {},
           char32_t mask_glyph = kDefaultMaskGlyph);

  // 26 lowercase ASCII letters plus space.
  static Alphabet ascii_lowercase();

  bool is_frequent(char32_t c) const { return frequent_set_.contains(c); }
  const std::u32string& chars() const { return chars_; }
  const std::u32string& frequent() const { return frequent_; }
  const std::vector<std::u32string>& combined() const { return combined_; }
  char32_t mask_glyph() const { return mask_glyph_; }

 private:
  std::u32string chars_;
  std::u32string frequent_;
  std::vector<std::u32string> combined_;
  std::unordered_set<char32_t> frequent_set_;
  char32_t mask_glyph_;
};

// Alphabet file: one frequent character per line; an optional `[chars]`
// section lists the full set and a `[combined]` section lists
// multi-code-point units. Blank lines are ignored; the space character is
// implicit.
Alphabet load_alphabet(const std::filesystem::path& path,
                       char32_t mask_glyph = kDefaultMaskGlyph);

// Deletes every character outside alphabet.frequent().
std::u32string clean_text(std::u32string_view raw, const Alphabet& alphabet);

class Lexicon {
 public:
  Lexicon() = default;
  // Drops empties and duplicates, keeping first-occurrence order.
  explicit Lexicon(const std::vector<std::u32string>& words);

  bool contains(std::u32string_view word) const {
    return members_.contains(std::u32string(word));
  }
  const std::vector<std::u32string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  std::vector<std::u32string> words_;
  std::unordered_set<std::u32string> members_;
};

// One word per line (or a single-column CSV). Lines are cleaned against the
// alphabet and trimmed. Throws IoError if unreadable, EmptyLexiconError if
// nothing survives.
Lexicon load_wordlist(const std::filesystem::path& path,
                      const Alphabet& alphabet);
// Same, without alphabet cleaning (evaluation lexicons).
Lexicon load_wordlist(const std::filesystem::path& path);

// Downloads `url` verbatim into `dest`. Throws FetchError on non-2xx status
// or transport failure.
std::size_t fetch_wordlist(const std::string& url,
                           const std::filesystem::path& dest,
                           int timeout_seconds = 10);

using TokenId = std::int32_t;

// Character <-> id bijection. Ids 0..5 are the specials in the order
// PAD, SOS, EOS, SEP, MASK, UNK; characters follow in code-point order.
// The mask glyph is not a character of the vocabulary: it encodes to MASK.
class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kSos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kSep = 3;
  static constexpr TokenId kMask = 4;
  static constexpr TokenId kUnk = 5;
  static constexpr TokenId kNumSpecials = 6;

  Vocab() : Vocab(std::u32string{}) {}
  explicit Vocab(std::u32string_view chars,
                 char32_t mask_glyph = kDefaultMaskGlyph);

  std::size_t size() const { return kNumSpecials + chars_.size(); }
  TokenId id_of(char32_t c) const;
  // Throws std::out_of_range for specials and out-of-range ids.
  char32_t char_of(TokenId id) const;
  bool is_special(TokenId id) const { return id >= 0 && id < kNumSpecials; }

  std::vector<TokenId> encode(std::u32string_view text) const;
  // MASK renders as the mask glyph; other specials are dropped.
  std::u32string decode(std::span<const TokenId> ids) const;

  const std::u32string& chars() const { return chars_; }
  char32_t mask_glyph() const { return mask_glyph_; }

  static std::string_view special_name(TokenId id);

  bool operator==(const Vocab& other) const {
    return chars_ == other.chars_ && mask_glyph_ == other.mask_glyph_;
  }

 private:
  std::u32string chars_;
  std::unordered_map<char32_t, TokenId> ids_;
  char32_t mask_glyph_;
};

// Vocabulary over every character of the source, mask and target fields.
// Throws DataError on an empty corpus.
Vocab build_vocab(std::span<const ParallelPair> corpus,
                  char32_t mask_glyph = kDefaultMaskGlyph);

}  // namespace dpcspell
