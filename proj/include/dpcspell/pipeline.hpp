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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpcspell/charlex.hpp"
#include "dpcspell/corpus_types.hpp"
#include "dpcspell/errorgen.hpp"
#include "dpcspell/transformer.hpp"

namespace dpcspell {

// Cascade shapes: detector + purificator + corrector, detector + corrector,
// corrector alone.
enum class StageVariant : std::uint8_t { DPC, DC, C };
enum class StageRole : std::uint8_t { Detector, Purificator, Corrector };

std::string_view label(StageVariant v);  // "dpc", "dc", "c"
std::string_view label(StageRole r);     // "detector", ...
// Throw UsageError on unknown labels.
StageVariant parse_variant(std::string_view s);
StageRole parse_role(std::string_view s);

// Throws UsageError for role/variant pairs that do not exist (variant C has
// only a corrector, variant DC has no purificator).
void check_role_for_variant(StageRole role, StageVariant variant);

struct StageExample {
  std::vector<TokenId> input;
  std::vector<TokenId> target;
  StageRole role = StageRole::Detector;
};

// input = source; target = mask with the glyph as MASK. Throws DataError when
// the pair's mask does not line up with its source.
StageExample make_detector_example(const ParallelPair& pair,
                                   const Vocab& vocab);
// input = SEP source SEP detected SEP; target = gold mask.
StageExample make_purificator_example(const ParallelPair& pair,
                                      std::u32string_view detected,
                                      const Vocab& vocab);
// input = SEP source SEP purified SEP; target = gold target.
StageExample make_corrector_example(const ParallelPair& pair,
                                    std::u32string_view purified,
                                    const Vocab& vocab);
// Corrector of variant C: raw source to target, no separators or mask.
StageExample make_plain_corrector_example(const ParallelPair& pair,
                                          const Vocab& vocab);

// Training-time example of `role` under `variant`, built from gold upstream
// masks.
StageExample make_stage_example(StageRole role, StageVariant variant,
                                const ParallelPair& pair, const Vocab& vocab);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  double seconds = 0.0;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
  // Purificator training with scheduled sampling: fraction of detector
  // predictions whose length differs from the source.
  std::optional<double> length_mismatch_rate;

  // `epoch,train_loss,val_loss,seconds`; an absent validation loss is an
  // empty field.
  std::string to_csv() const;
};

struct TrainOptions {
  int batch_size = 128;
  std::uint64_t seed = 1;
  bool early_stopping = false;
  int patience = 10;
  // Purificator only: with probability `sampling_rate`, feed the frozen
  // detector's prediction instead of the gold mask.
  bool scheduled_sampling = false;
  double sampling_rate = 0.5;
  const Seq2SeqModel* detector = nullptr;
  // Called after every epoch (progress reporting).
  std::function<void(const EpochLog&)> on_epoch;
};

// Teacher-forced training of one model on prepared examples. `init` resumes
// from existing parameters (optimizer moments start fresh). Throws
// DivergenceError naming the epoch on a non-finite loss.
Seq2SeqModel train_seq2seq(std::span<const StageExample> train,
                           std::span<const StageExample> validation,
                           const TransformerConfig& config,
                           const TrainOptions& options, TrainingLog& log,
                           const Seq2SeqModel* init = nullptr);

struct TrainedStage {
  Seq2SeqModel model;
  TrainingLog log;
};

// Builds the role's examples from the split (gold upstream masks) and trains
// it. `config.vocab_size` is taken from `vocab`.
TrainedStage train_stage(StageRole role, StageVariant variant,
                         const CorpusSplit& split, const Vocab& vocab,
                         TransformerConfig config, const TrainOptions& options,
                         const Seq2SeqModel* init = nullptr);

struct DecodeOptions {
  // Beam width for the final stage; 0 selects greedy decoding.
  int beam = 0;
  // Extra output tokens allowed beyond the input word length.
  int slack = 8;
};

// Parses "greedy" or "beam:B". Throws UsageError otherwise.
DecodeOptions parse_decode(std::string_view s);

// Frozen models of one cascade; unused stages may be null.
struct Cascade {
  const Seq2SeqModel* detector = nullptr;
  const Seq2SeqModel* purificator = nullptr;
  const Seq2SeqModel* corrector = nullptr;
  const Vocab* vocab = nullptr;
};

struct Correction {
  std::u32string output;
  // Best-first candidates of the final stage (one entry under greedy).
  std::vector<std::u32string> candidates;
  std::u32string detected;
  // Empty when the cascade has no purificator.
  std::u32string purified;
  bool detector_length_mismatch = false;
};

// Cascade of `variant` on predicted intermediates. Intermediate stages
// decode greedily; the final stage follows `decode`. Throws
// InputTooLongError if any stage input exceeds max_seq_len, UsageError if a
// needed model is missing.
Correction correct_word_variant(StageVariant variant, const Cascade& models,
                                std::u32string_view word,
                                const DecodeOptions& decode = {});
Correction correct_word(const Cascade& models, std::u32string_view word,
                        const DecodeOptions& decode = {});

// Same as correct_word_variant over many words; greedy stages are decoded in
// batches. Output order follows input order.
std::vector<Correction> correct_words(StageVariant variant,
                                      const Cascade& models,
                                      std::span<const std::u32string> words,
                                      const DecodeOptions& decode = {},
                                      int batch_size = 64);

// ---- checkpoints ----------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct StageCheckpoint {
  Seq2SeqModel model;
  Vocab vocab;
  StageRole role = StageRole::Corrector;
  StageVariant variant = StageVariant::DPC;
};

// "DPCS", u32 version, config text, vocab tokens, named float32 arrays and a
// trailing FNV-1a 64 checksum; all integers little-endian.
std::string serialize_checkpoint(const Seq2SeqModel& model, const Vocab& vocab,
                                 StageRole role, StageVariant variant);
StageCheckpoint parse_checkpoint(const std::string& bytes,
                                 const std::string& origin = "checkpoint");
void save_checkpoint(const Seq2SeqModel& model, const Vocab& vocab,
                     StageRole role, StageVariant variant,
                     const std::filesystem::path& path);
// Throws CheckpointError on bad magic, version, checksum or truncation.
StageCheckpoint load_checkpoint(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

// ---- transformer plausibility scorer ---------------------------------------

// Scores a pair by the mean per-token negative log-likelihood of its source
// given its target under a model trained target -> source.
class TransformerScorer final : public PlausibilityScorer {
 public:
  TransformerScorer(const Seq2SeqModel& model, const Vocab& vocab)
      : model_(model), vocab_(vocab) {}
  double score(const ParallelPair& pair) const override;

 private:
  const Seq2SeqModel& model_;
  const Vocab& vocab_;
};

// Trains the target -> source model behind TransformerScorer.
Seq2SeqModel train_scorer_model(std::span<const ParallelPair> pairs,
                                const Vocab& vocab, TransformerConfig config,
                                const TrainOptions& options);

}  // namespace dpcspell
