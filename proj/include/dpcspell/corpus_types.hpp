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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace dpcspell {

inline constexpr char32_t kDefaultMaskGlyph = U'_';

enum class ErrorType : std::uint8_t {
  Cognitive,
  Homonym,
  VisualSingle,
  VisualCombined,
  TypoDeletion,
  TypoSubstBijoy,
  TypoSubstAvro,
  TypoTransposition,
  TypoInsertion,
  RunOn,
  SplitLeft,
  SplitRight,
  SplitRandom,
  SplitBoth,
};

inline constexpr std::size_t kNumErrorTypes = 14;

inline constexpr std::array<ErrorType, kNumErrorTypes> kAllErrorTypes = {
    ErrorType::Cognitive,         ErrorType::Homonym,
    ErrorType::VisualSingle,      ErrorType::VisualCombined,
    ErrorType::TypoDeletion,      ErrorType::TypoSubstBijoy,
    ErrorType::TypoSubstAvro,     ErrorType::TypoTransposition,
    ErrorType::TypoInsertion,     ErrorType::RunOn,
    ErrorType::SplitLeft,         ErrorType::SplitRight,
    ErrorType::SplitRandom,       ErrorType::SplitBoth,
};

inline std::size_t index_of(ErrorType t) { return static_cast<std::size_t>(t); }

// Stable lowercase label used in the corpus CSV `error_type` column.
std::string_view label(ErrorType t);
// Human-readable name used in generation and evaluation reports.
std::string_view display_name(ErrorType t);
// Throws DataError for unknown labels.
ErrorType parse_error_type(std::string_view label);

// One corpus row: erroneous source, its mask, the gold target and the type.
struct ParallelPair {
  std::u32string source;
  std::u32string mask;
  std::u32string target;
  ErrorType error_type = ErrorType::Cognitive;

  bool operator==(const ParallelPair&) const = default;
};

}  // namespace dpcspell
