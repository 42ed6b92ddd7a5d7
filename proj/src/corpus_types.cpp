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

#include "dpcspell/corpus_types.hpp"

#include <string>

#include "dpcspell/errors.hpp"

namespace dpcspell {

namespace {

struct TypeNames {
  std::string_view label;
  std::string_view display;
};

constexpr TypeNames kNames[kNumErrorTypes] = {
    {"cognitive", "Cognitive Error"},
    {"homonym", "Homonym Error"},
    {"visual_single", "Visual Error (Single Character)"},
    {"visual_combined", "Visual Error (Combined Character)"},
    {"typo_deletion", "Typographical Deletion"},
    {"typo_subst_bijoy", "Typographical Substitution (Bijoy)"},
    {"typo_subst_avro", "Typographical Substitution (Avro)"},
    {"typo_transposition", "Typographical Transposition"},
    {"typo_insertion", "Typographical Insertion"},
    {"runon", "Run-on Error"},
    {"split_left", "Split-word Error (Left)"},
    {"split_right", "Split-word Error (Right)"},
    {"split_random", "Split-word Error (Random)"},
    {"split_both", "Split-word Error (Both)"},
};

}  // namespace

std::string_view label(ErrorType t) { return kNames[index_of(t)].label; }

std::string_view display_name(ErrorType t) {
  return kNames[index_of(t)].display;
}

ErrorType parse_error_type(std::string_view text) {
  for (ErrorType t : kAllErrorTypes) {
    if (label(t) == text) return t;
  }
  throw DataError("unknown error type label '" + std::string(text) + "'");
}

}  // namespace dpcspell
