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

// dpcspell command line: corpus generation, training, evaluation and
// correction.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dpcspell/baseline.hpp"
#include "dpcspell/charlex.hpp"
#include "dpcspell/config.hpp"
#include "dpcspell/errorgen.hpp"
#include "dpcspell/errors.hpp"
#include "dpcspell/metrics.hpp"
#include "dpcspell/pipeline.hpp"
#include "dpcspell/utf8.hpp"

namespace fs = std::filesystem;
using namespace dpcspell;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

RunConfig config_or_default(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return load_run_config(path);
}

// ---- gen / filter / split --------------------------------------------------

struct GenArgs {
  std::string config, wordlist, out;
};

int run_gen(const GenArgs& a) {
  const RunConfig cfg = config_or_default(a.config);
  const Alphabet alphabet = config_alphabet(cfg);
  fs::path wl;
  if (!a.wordlist.empty()) {
    wl = a.wordlist;
  } else if (cfg.wordlist) {
    wl = *cfg.wordlist;
  } else {
    throw UsageError("no wordlist given (--wordlist or [generation] wordlist)");
  }
  const Lexicon lexicon = load_wordlist(wl, alphabet);
  const GenerationTables tables = load_generation_tables(cfg, alphabet);
  GeneratedCorpus corpus =
      assemble_corpus(lexicon, tables, cfg.homonyms, cfg.quotas, cfg.generation_seed);
  write_corpus(corpus.pairs, a.out);
  const std::string report = corpus.report.render();
  write_text(a.out + ".report.txt", report);
  std::cout << report;
  return 0;
}

struct FilterArgs {
  std::string config, in, out, wordlist;
  double percentile = -1.0;
};

int run_filter(const FilterArgs& a) {
  const RunConfig cfg = config_or_default(a.config);
  const double pct = a.percentile > 0.0 ? a.percentile : cfg.filtration_percentile;
  if (!(pct > 0.0 && pct <= 1.0)) throw UsageError("--percentile must be in (0, 1]");
  const std::vector<ParallelPair> pairs = read_corpus(a.in);
  std::vector<ParallelPair> kept;
  if (cfg.scorer == "transformer") {
    const Vocab vocab = build_vocab(pairs, cfg.mask_glyph);
    TrainOptions opt;
    opt.batch_size = cfg.batch_size;
    opt.seed = cfg.training_seed;
    const Seq2SeqModel model = train_scorer_model(pairs, vocab, cfg.model, opt);
    const TransformerScorer scorer(model, vocab);
    kept = filter_errors(pairs, scorer, pct);
  } else {
    fs::path wl;
    if (!a.wordlist.empty()) {
      wl = a.wordlist;
    } else if (cfg.wordlist) {
      wl = *cfg.wordlist;
    } else {
      throw UsageError("trigram scorer needs a wordlist (--wordlist or config)");
    }
    const Lexicon lexicon = load_wordlist(wl, config_alphabet(cfg));
    const TrigramScorer scorer(lexicon);
    kept = filter_errors(pairs, scorer, pct);
  }
  write_corpus(kept, a.out);
  std::cout << "kept " << kept.size() << " of " << pairs.size() << " pairs\n";
  return 0;
}

struct SplitArgs {
  std::string in, out_dir;
  std::uint64_t seed = 1;
};

int run_split(const SplitArgs& a) {
  const std::vector<ParallelPair> pairs = read_corpus(a.in);
  const CorpusSplit split = stratified_split(pairs, SplitRatios{}, a.seed);
  fs::create_directories(a.out_dir);
  write_corpus(split.train, fs::path(a.out_dir) / "train.csv");
  write_corpus(split.validation, fs::path(a.out_dir) / "val.csv");
  write_corpus(split.test, fs::path(a.out_dir) / "test.csv");
  std::cout << "train " << split.train.size() << ", val " << split.validation.size()
            << ", test " << split.test.size() << "\n";
  return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string config, stage, variant, data_dir, out, resume, detector;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  bool quiet = false;
};

std::vector<ParallelPair> read_if_present(const fs::path& p) {
  if (!fs::exists(p)) return {};
  return read_corpus(p);
}

int run_train(const TrainArgs& a) {
  const RunConfig cfg = config_or_default(a.config);
  const StageVariant variant = parse_variant(a.variant.empty() ? cfg.variant : a.variant);
  const StageRole role = parse_role(a.stage.empty() ? cfg.stage : a.stage);
  check_role_for_variant(role, variant);

  const fs::path dir(a.data_dir);
  CorpusSplit split;
  split.train = read_corpus(dir / "train.csv");
  split.validation = read_if_present(dir / "val.csv");
  const std::vector<ParallelPair> test = read_if_present(dir / "test.csv");

  TransformerConfig model_cfg = cfg.model;
  if (a.epochs) model_cfg.epochs = *a.epochs;
  TrainOptions opt;
  opt.batch_size = a.batch_size ? *a.batch_size : cfg.batch_size;
  opt.seed = a.seed ? *a.seed : cfg.training_seed;
  opt.early_stopping = cfg.early_stopping;
  opt.patience = cfg.patience;
  opt.scheduled_sampling = cfg.scheduled_sampling;
  opt.sampling_rate = cfg.sampling_rate;
  const int total = model_cfg.epochs;
  if (!a.quiet) {
    opt.on_epoch = [total](const EpochLog& e) {
      std::fprintf(stderr, "epoch %d/%d  train %.4f", e.epoch, total, e.train_loss);
      if (e.val_loss) std::fprintf(stderr, "  val %.4f", *e.val_loss);
      std::fprintf(stderr, "  (%.1fs)\n", e.seconds);
    };
  }

  std::optional<StageCheckpoint> resume;
  std::optional<Vocab> vocab;
  if (!a.resume.empty()) {
    resume = load_checkpoint(a.resume);
    if (resume->role != role || resume->variant != variant) {
      throw UsageError("resume checkpoint holds a " + std::string(label(resume->role)) +
                       " of variant " + std::string(label(resume->variant)));
    }
    vocab = resume->vocab;
  } else {
    std::vector<ParallelPair> all = split.train;
    all.insert(all.end(), split.validation.begin(), split.validation.end());
    all.insert(all.end(), test.begin(), test.end());
    vocab = build_vocab(all, cfg.mask_glyph);
  }
  std::optional<StageCheckpoint> detector;
  if (opt.scheduled_sampling && role == StageRole::Purificator) {
    if (a.detector.empty()) throw UsageError("scheduled sampling needs --detector");
    detector = load_checkpoint(a.detector);
    if (!(detector->vocab == *vocab)) throw DataError("detector vocabulary differs from the data");
    opt.detector = &detector->model;
  }
  TrainedStage trained = train_stage(role, variant, split, *vocab, model_cfg, opt,
                                     resume ? &resume->model : nullptr);
  save_checkpoint(trained.model, *vocab, role, variant, a.out);
  write_text(a.out + ".log.csv", trained.log.to_csv());
  if (trained.log.length_mismatch_rate) {
    std::fprintf(stderr, "detector length mismatch rate %.4f\n",
                 *trained.log.length_mismatch_rate);
  }
  return 0;
}

// ---- eval / correct --------------------------------------------------------

struct LoadedCascade {
  std::vector<StageCheckpoint> checkpoints;
  StageVariant variant = StageVariant::DPC;
  Cascade cascade;
};

LoadedCascade load_cascade(const std::vector<std::string>& paths,
                           const std::string& variant_flag) {
  LoadedCascade lc;
  lc.checkpoints.reserve(paths.size());
  for (const std::string& p : paths) lc.checkpoints.push_back(load_checkpoint(p));
  if (lc.checkpoints.empty()) throw UsageError("no checkpoints given");
  lc.variant = variant_flag.empty() ? lc.checkpoints.front().variant
                                    : parse_variant(variant_flag);
  for (std::size_t i = 0; i < lc.checkpoints.size(); ++i) {
    const StageCheckpoint& c = lc.checkpoints[i];
    if (!(c.vocab == lc.checkpoints.front().vocab)) {
      throw DataError("checkpoint " + paths[i] + " has a different vocabulary than " +
                      paths.front());
    }
    check_role_for_variant(c.role, lc.variant);
    const Seq2SeqModel** slot = c.role == StageRole::Detector      ? &lc.cascade.detector
                                : c.role == StageRole::Purificator ? &lc.cascade.purificator
                                                                   : &lc.cascade.corrector;
    if (*slot != nullptr) throw UsageError("two checkpoints for the " + std::string(label(c.role)));
    *slot = &c.model;
  }
  lc.cascade.vocab = &lc.checkpoints.front().vocab;
  return lc;
}

struct EvalArgs {
  std::string config, variant, test, lexicon, decode, out = "report", ma_mode;
  std::vector<std::string> checkpoints;
  std::optional<int> k;
};

int run_eval(const EvalArgs& a) {
  const RunConfig cfg = config_or_default(a.config);
  const LoadedCascade lc = load_cascade(a.checkpoints, a.variant);
  DecodeOptions dec = parse_decode(a.decode.empty() ? cfg.decode_spec() : a.decode);
  dec.slack = cfg.slack;
  const int k = a.k ? *a.k : cfg.k;
  if (k < 1) throw UsageError("--k must be at least 1");
  const MaMode mode = a.ma_mode.empty() ? cfg.ma_mode : parse_ma_mode(a.ma_mode);
  const std::vector<ParallelPair> test = read_corpus(a.test);
  if (test.empty()) throw DataError("test set " + a.test + " is empty");
  Lexicon lexicon;
  if (!a.lexicon.empty()) {
    lexicon = load_wordlist(a.lexicon);
  } else if (mode == MaMode::Lexicon) {
    throw UsageError("lexicon-mode MA needs --lexicon");
  }
  std::vector<std::u32string> words;
  for (const ParallelPair& p : test) words.push_back(p.source);
  const std::vector<Correction> out = correct_words(lc.variant, lc.cascade, words, dec);
  std::vector<Prediction> preds;
  std::size_t mismatch = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    preds.push_back({test[i].target, out[i].candidates, test[i].error_type});
    if (preds.back().top_k.empty()) preds.back().top_k.push_back(out[i].output);
    if (out[i].detector_length_mismatch) ++mismatch;
  }
  const EvalReport report = build_report(preds, lexicon, k, mode);
  write_text(a.out + ".txt", report.to_text());
  write_text(a.out + ".csv", report.to_csv());
  std::cout << report.to_text();
  if (lc.variant != StageVariant::C) {
    std::cout << "detector length mismatches: " << mismatch << " of " << test.size() << "\n";
  }
  return 0;
}

struct CorrectArgs {
  std::string variant, decode = "greedy";
  std::vector<std::string> checkpoints;
  std::vector<std::string> words;
  bool show_mask = false;
  bool from_stdin = false;
};

int run_correct(const CorrectArgs& a) {
  const LoadedCascade lc = load_cascade(a.checkpoints, a.variant);
  const DecodeOptions dec = parse_decode(a.decode);
  std::vector<std::u32string> words;
  for (const std::string& w : a.words) words.push_back(utf8::decode(w));
  if (a.from_stdin) {
    std::string line;
    while (std::getline(std::cin, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) words.push_back(utf8::decode(line));
    }
  }
  if (words.empty()) return 0;
  const auto out = correct_words(lc.variant, lc.cascade, words, dec);
  for (const Correction& c : out) {
    std::cout << utf8::encode(c.output);
    if (a.show_mask) {
      if (lc.variant != StageVariant::C) std::cout << "\tdetected=" << utf8::encode(c.detected);
      if (lc.variant == StageVariant::DPC) std::cout << "\tpurified=" << utf8::encode(c.purified);
    }
    std::cout << "\n";
  }
  return 0;
}

struct SuggestArgs {
  std::string lexicon, word;
  int max_dist = 2;
  int k = 5;
};

int run_suggest(const SuggestArgs& a) {
  if (a.k < 1) throw UsageError("--k must be at least 1");
  const Lexicon lexicon = load_wordlist(a.lexicon);
  for (const Suggestion& s :
       suggest(utf8::decode(a.word), lexicon, a.max_dist, static_cast<std::size_t>(a.k))) {
    std::cout << utf8::encode(s.word) << "\t" << s.distance << "\n";
  }
  return 0;
}

int exit_code_of(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 1;
  if (dynamic_cast<const DivergenceError*>(&e)) return 3;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character-level spelling correction: corpus synthesis, cascade training and evaluation"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "generate an error corpus from a wordlist");
  c_gen->add_option("--config", gen.config, "run configuration");
  c_gen->add_option("--wordlist", gen.wordlist, "word list (overrides the config)");
  c_gen->add_option("--out", gen.out, "corpus CSV to write")->required();

  FilterArgs filt;
  auto* c_filter = app.add_subcommand("filter", "drop implausible typographical errors");
  c_filter->add_option("--config", filt.config, "run configuration");
  c_filter->add_option("--in", filt.in, "corpus CSV")->required();
  c_filter->add_option("--out", filt.out, "filtered corpus CSV")->required();
  c_filter->add_option("--wordlist", filt.wordlist, "lexicon for the trigram scorer");
  c_filter->add_option("--percentile", filt.percentile, "keep fraction per type");

  SplitArgs spl;
  auto* c_split = app.add_subcommand("split", "stratified 80/5/15 split");
  c_split->add_option("--in", spl.in, "corpus CSV")->required();
  c_split->add_option("--out-dir", spl.out_dir, "directory for train/val/test CSVs")->required();
  c_split->add_option("--seed", spl.seed, "shuffle seed");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "train one cascade stage");
  c_train->add_option("--config", tr.config, "run configuration");
  c_train->add_option("--stage", tr.stage, "detector | purificator | corrector");
  c_train->add_option("--variant", tr.variant, "dpc | dc | c");
  c_train->add_option("--data-dir", tr.data_dir, "directory with train.csv and val.csv")->required();
  c_train->add_option("--out", tr.out, "checkpoint to write")->required();
  c_train->add_option("--seed", tr.seed, "training seed");
  c_train->add_option("--epochs", tr.epochs, "override the configured epoch count");
  c_train->add_option("--batch-size", tr.batch_size, "override the configured batch size");
  c_train->add_option("--resume", tr.resume, "continue from this checkpoint");
  c_train->add_option("--detector", tr.detector, "detector checkpoint for scheduled sampling");
  c_train->add_flag("--quiet", tr.quiet, "no per-epoch progress");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "evaluate a cascade on a test corpus");
  c_eval->add_option("--config", ev.config, "run configuration");
  c_eval->add_option("--checkpoints", ev.checkpoints, "stage checkpoints")->required();
  c_eval->add_option("--variant", ev.variant, "dpc | dc | c (default: from checkpoints)");
  c_eval->add_option("--test", ev.test, "test corpus CSV")->required();
  c_eval->add_option("--lexicon", ev.lexicon, "valid-word list for MA");
  c_eval->add_option("--k", ev.k, "MA candidate depth");
  c_eval->add_option("--ma-mode", ev.ma_mode, "lexicon | gold");
  c_eval->add_option("--decode", ev.decode, "greedy | beam:B");
  c_eval->add_option("--out", ev.out, "report path prefix (.txt and .csv)");

  CorrectArgs co;
  auto* c_correct = app.add_subcommand("correct", "correct words with a trained cascade");
  c_correct->add_option("--checkpoints", co.checkpoints, "stage checkpoints")->required();
  c_correct->add_option("--variant", co.variant, "dpc | dc | c (default: from checkpoints)");
  c_correct->add_option("--decode", co.decode, "greedy | beam:B");
  c_correct->add_flag("--show-mask", co.show_mask, "print detector and purificator outputs");
  c_correct->add_flag("--stdin", co.from_stdin, "read words from standard input");
  c_correct->add_option("words", co.words, "words to correct");

  SuggestArgs sg;
  auto* c_suggest = app.add_subcommand("suggest", "edit-distance suggestions from a lexicon");
  c_suggest->add_option("--lexicon", sg.lexicon, "word list")->required();
  c_suggest->add_option("--max-dist", sg.max_dist, "largest edit distance");
  c_suggest->add_option("--k", sg.k, "number of suggestions");
  c_suggest->add_option("word", sg.word, "word to look up")->required();

  std::string fetch_url, fetch_out;
  auto* c_fetch = app.add_subcommand("fetch", "download a word list over HTTP");
  c_fetch->add_option("--url", fetch_url, "http URL (https only in OpenSSL builds)")->required();
  c_fetch->add_option("--out", fetch_out, "file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (c_gen->parsed()) return run_gen(gen);
    if (c_filter->parsed()) return run_filter(filt);
    if (c_split->parsed()) return run_split(spl);
    if (c_train->parsed()) return run_train(tr);
    if (c_eval->parsed()) return run_eval(ev);
    if (c_correct->parsed()) return run_correct(co);
    if (c_suggest->parsed()) return run_suggest(sg);
    if (c_fetch->parsed()) {
      const std::size_t n = fetch_wordlist(fetch_url, fetch_out);
      std::cout << "wrote " << n << " bytes to " << fetch_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_of(e);
  }
  return 1;
}
