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

#include "dpcspell/baseline.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace dpcspell {

int EditScript::cost() const {
  return static_cast<int>(std::count_if(
      edits.begin(), edits.end(),
      [](const Edit& e) { return e.op != EditOp::Keep; }));
}

Alignment levenshtein(std::u32string_view a, std::u32string_view b) {
  return align_sequences(a, b);
}

namespace {

// Distance bounded by `limit`: returns limit + 1 as soon as every entry of a
// row exceeds it.
int bounded_distance(std::u32string_view a, std::u32string_view b,
                     int limit) {
  const std::size_t m = b.size();
  std::vector<int> prev(m + 1);
  std::vector<int> cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    int row_min = cur[0];
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min(sub, std::min(prev[j], cur[j - 1]) + 1);
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > limit) return limit + 1;
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

int edit_distance(std::u32string_view a, std::u32string_view b) {
  return bounded_distance(a, b, static_cast<int>(a.size() + b.size()));
}

std::u32string apply_script(const EditScript& script,
                            std::u32string_view source,
                            std::u32string_view target) {
  std::u32string out;
  for (const Edit& e : script.edits) {
    switch (e.op) {
      case EditOp::Keep:
        out.push_back(source.at(static_cast<std::size_t>(e.source_index)));
        break;
      case EditOp::Substitute:
      case EditOp::InsertTarget:
        out.push_back(target.at(static_cast<std::size_t>(e.target_index)));
        break;
      case EditOp::DeleteSource:
        break;
    }
  }
  return out;
}

std::vector<Suggestion> suggest(std::u32string_view word,
                                const Lexicon& lexicon, int max_dist,
                                std::size_t k) {
  if (k == 0) throw std::invalid_argument("suggest: k must be at least 1");
  std::vector<Suggestion> found;
  for (const auto& candidate : lexicon.words()) {
    const int len_gap = static_cast<int>(candidate.size()) -
                        static_cast<int>(word.size());
    if (std::abs(len_gap) > max_dist) continue;
    const int d = bounded_distance(word, candidate, max_dist);
    if (d <= max_dist) found.push_back({candidate, d});
  }
  // Lexicon order is the iteration order, so a stable sort on distance gives
  // the (distance, lexicon order) ranking.
  std::stable_sort(found.begin(), found.end(),
                   [](const Suggestion& x, const Suggestion& y) {
                     return x.distance < y.distance;
                   });
  if (found.size() > k) found.resize(k);
  return found;
}

std::u32string rulebased_correct(std::u32string_view word,
                                 const Lexicon& lexicon) {
  const auto best = suggest(word, lexicon, 2, 1);
  return best.empty() ? std::u32string(word) : best.front().word;
}

}  // namespace dpcspell
