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
#include <map>
#include <optional>
#include <string>

#include "dpcspell/charlex.hpp"
#include "dpcspell/corpus_types.hpp"
#include "dpcspell/errorgen.hpp"
#include "dpcspell/metrics.hpp"
#include "dpcspell/transformer.hpp"

namespace dpcspell {

// Sectioned key=value run configuration. '#' and ';' start comment lines.
// Relative paths are resolved against the config file's directory.
struct RunConfig {
  // [alphabet]
  std::optional<std::filesystem::path> alphabet;
  char32_t mask_glyph = kDefaultMaskGlyph;

  // [generation]
  std::optional<std::filesystem::path> wordlist;
  std::uint64_t generation_seed = 1;
  std::map<ErrorType, std::size_t> quotas;            // quota.<type>
  std::map<ErrorType, std::filesystem::path> tables;  // table.<type>
  std::optional<std::filesystem::path> insertion_neighbors;
  std::optional<std::filesystem::path> homonyms;
  double filtration_percentile = 0.90;
  std::string scorer = "trigram";  // trigram | transformer

  // [model]
  TransformerConfig model;

  // [training]
  std::string variant = "dpc";
  std::string stage = "corrector";
  int batch_size = 128;
  std::uint64_t training_seed = 1;
  std::uint64_t split_seed = 1;
  bool early_stopping = false;
  int patience = 10;
  bool scheduled_sampling = false;
  double sampling_rate = 0.5;

  // [evaluation]
  int k = 3;
  MaMode ma_mode = MaMode::Lexicon;
  std::string decode = "greedy";  // greedy | beam
  int beam_width = 5;
  int slack = 8;

  // "greedy" or "beam:<beam_width>".
  std::string decode_spec() const;
};

// Throws UsageError on unknown sections or keys and malformed values.
RunConfig parse_run_config(const std::string& text,
                           const std::filesystem::path& base_dir,
                           const std::string& origin = "config");
RunConfig load_run_config(const std::filesystem::path& path);

// [alphabet] file, or lowercase ASCII when none is set.
Alphabet config_alphabet(const RunConfig& cfg);
// Confusion tables of [generation], validated against `alphabet`.
GenerationTables load_generation_tables(const RunConfig& cfg,
                                        const Alphabet& alphabet);

}  // namespace dpcspell
