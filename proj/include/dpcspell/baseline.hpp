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

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dpcspell/charlex.hpp"

namespace dpcspell {

enum class EditOp : std::uint8_t { Keep, Substitute, DeleteSource, InsertTarget };

// One alignment step. Indices are -1 where the op has no source or target
// position (InsertTarget / DeleteSource respectively).
struct Edit {
  EditOp op;
  int source_index;
  int target_index;

  bool operator==(const Edit&) const = default;
};

struct EditScript {
  std::vector<Edit> edits;

  // Number of non-Keep operations.
  int cost() const;
};

struct Alignment {
  int distance = 0;
  EditScript script;
};

// Unit-cost Levenshtein alignment over any random-access sequence of
// equality-comparable elements.
//
// The script is recovered by walking forward from (0, 0) over the suffix
// distance table and, among moves that stay optimal, preferring the diagonal
// (keep or substitute), then deleting a source element, then inserting a
// target element. This yields the lexicographically smallest optimal move
// sequence under that order: equal prefixes are always kept, and deletions
// inside a run of repeated characters land on the last copy.
template <typename Seq>
Alignment align_sequences(const Seq& a, const Seq& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  const int stride = m + 1;
  // suffix[i * stride + j] = distance(a[i..], b[j..])
  std::vector<int> suffix(static_cast<std::size_t>(n + 1) * stride);
  auto at = [&](int i, int j) -> int& {
    return suffix[static_cast<std::size_t>(i) * stride + j];
  };
  for (int i = n; i >= 0; --i) {
    for (int j = m; j >= 0; --j) {
      if (i == n) {
        at(i, j) = m - j;
      } else if (j == m) {
        at(i, j) = n - i;
      } else {
        const int diag = at(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
        const int del = at(i + 1, j) + 1;
        const int ins = at(i, j + 1) + 1;
        at(i, j) = std::min(diag, std::min(del, ins));
      }
    }
  }
  Alignment result;
  result.distance = at(0, 0);
  int i = 0;
  int j = 0;
  while (i < n || j < m) {
    const int here = at(i, j);
    if (i < n && j < m) {
      const bool same = a[i] == b[j];
      if (at(i + 1, j + 1) + (same ? 0 : 1) == here) {
        result.script.edits.push_back(
            {same ? EditOp::Keep : EditOp::Substitute, i, j});
        ++i;
        ++j;
        continue;
      }
    }
    if (i < n && at(i + 1, j) + 1 == here) {
      result.script.edits.push_back({EditOp::DeleteSource, i, -1});
      ++i;
      continue;
    }
    result.script.edits.push_back({EditOp::InsertTarget, -1, j});
    ++j;
  }
  return result;
}

Alignment levenshtein(std::u32string_view a, std::u32string_view b);

// Distance only, two-row table.
int edit_distance(std::u32string_view a, std::u32string_view b);

// Replays `script` on `source`, taking inserted/substituted elements from
// `target`. Returns the reconstructed sequence.
std::u32string apply_script(const EditScript& script,
                            std::u32string_view source,
                            std::u32string_view target);

struct Suggestion {
  std::u32string word;
  int distance = 0;

  bool operator==(const Suggestion&) const = default;
};

// Lexicon words within `max_dist`, ordered by (distance, lexicon order),
// truncated to `k`.
std::vector<Suggestion> suggest(std::u32string_view word,
                                const Lexicon& lexicon, int max_dist,
                                std::size_t k);

// Edit-distance-only rule-based corrector: best suggestion within distance 2,
// else the input unchanged.
std::u32string rulebased_correct(std::u32string_view word,
                                 const Lexicon& lexicon);

}  // namespace dpcspell
