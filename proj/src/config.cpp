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

#include "dpcspell/config.hpp"

#include <charconv>
#include <functional>

#include "dpcspell/errors.hpp"
#include "dpcspell/utf8.hpp"
#include "io_util.hpp"

namespace dpcspell {

std::string RunConfig::decode_spec() const {
  if (decode == "beam") return "beam:" + std::to_string(beam_width);
  return decode;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Ctx {
  const std::string& origin;
  std::size_t line;
  [[noreturn]] void fail(const std::string& msg) const {
    throw UsageError(origin + ":" + std::to_string(line) + ": " + msg);
  }
};

long long to_int(const std::string& v, const Ctx& c, long long lo) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) c.fail("'" + v + "' is not an integer");
  if (out < lo) c.fail("value " + v + " is below " + std::to_string(lo));
  return out;
}

double to_double(const std::string& v, const Ctx& c) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) c.fail("'" + v + "' is not a number");
    return d;
  } catch (const std::logic_error&) {
    c.fail("'" + v + "' is not a number");
  }
}

bool to_bool(const std::string& v, const Ctx& c) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  c.fail("'" + v + "' is not a boolean");
}

}  // namespace

RunConfig parse_run_config(const std::string& text,
                           const std::filesystem::path& base_dir,
                           const std::string& origin) {
  RunConfig cfg;
  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base_dir / p;
  };
  std::string section;
  std::size_t lineno = 0;
  for (const std::string& raw : detail::split_lines(text)) {
    ++lineno;
    const Ctx c{origin, lineno};
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') c.fail("unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "alphabet" && section != "generation" && section != "model" &&
          section != "training" && section != "evaluation") {
        c.fail("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) c.fail("expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string val = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) c.fail("key '" + key + "' outside any section");
    const auto unknown = [&] { c.fail("unknown key '" + key + "' in [" + section + "]"); };

    if (section == "alphabet") {
      if (key == "file") {
        cfg.alphabet = path_of(val);
      } else if (key == "mask_glyph") {
        const std::u32string g = utf8::decode(val);
        if (g.size() != 1) c.fail("mask_glyph must be one character");
        cfg.mask_glyph = g[0];
      } else {
        unknown();
      }
    } else if (section == "generation") {
      if (key == "wordlist") {
        cfg.wordlist = path_of(val);
      } else if (key == "seed") {
        cfg.generation_seed = static_cast<std::uint64_t>(to_int(val, c, 0));
      } else if (key.rfind("quota.", 0) == 0) {
        try {
          cfg.quotas[parse_error_type(key.substr(6))] =
              static_cast<std::size_t>(to_int(val, c, 0));
        } catch (const DataError&) {
          unknown();
        }
      } else if (key.rfind("table.", 0) == 0) {
        try {
          cfg.tables[parse_error_type(key.substr(6))] = path_of(val);
        } catch (const DataError&) {
          unknown();
        }
      } else if (key == "insertion_neighbors") {
        cfg.insertion_neighbors = path_of(val);
      } else if (key == "homonyms") {
        cfg.homonyms = path_of(val);
      } else if (key == "filtration_percentile") {
        cfg.filtration_percentile = to_double(val, c);
        if (!(cfg.filtration_percentile > 0.0 && cfg.filtration_percentile <= 1.0)) {
          c.fail("filtration_percentile must be in (0, 1]");
        }
      } else if (key == "scorer") {
        if (val != "trigram" && val != "transformer") c.fail("scorer must be trigram or transformer");
        cfg.scorer = val;
      } else {
        unknown();
      }
    } else if (section == "model") {
      TransformerConfig& m = cfg.model;
      if (key == "num_layers") m.num_layers = static_cast<int>(to_int(val, c, 1));
      else if (key == "num_heads") m.num_heads = static_cast<int>(to_int(val, c, 1));
      else if (key == "hidden_dim") m.hidden_dim = static_cast<int>(to_int(val, c, 1));
      else if (key == "pf_dim") m.pf_dim = static_cast<int>(to_int(val, c, 1));
      else if (key == "dropout") m.dropout = to_double(val, c);
      else if (key == "max_seq_len") m.max_seq_len = static_cast<int>(to_int(val, c, 3));
      else if (key == "learning_rate") m.learning_rate = to_double(val, c);
      else if (key == "grad_clip") m.grad_clip = to_double(val, c);
      else if (key == "epochs") m.epochs = static_cast<int>(to_int(val, c, 0));
      else unknown();
    } else if (section == "training") {
      if (key == "variant") {
        cfg.variant = val;
      } else if (key == "stage") {
        cfg.stage = val;
      } else if (key == "batch_size") {
        cfg.batch_size = static_cast<int>(to_int(val, c, 1));
      } else if (key == "seed") {
        cfg.training_seed = static_cast<std::uint64_t>(to_int(val, c, 0));
      } else if (key == "split_seed") {
        cfg.split_seed = static_cast<std::uint64_t>(to_int(val, c, 0));
      } else if (key == "early_stopping") {
        cfg.early_stopping = to_bool(val, c);
      } else if (key == "patience") {
        cfg.patience = static_cast<int>(to_int(val, c, 1));
      } else if (key == "scheduled_sampling") {
        cfg.scheduled_sampling = to_bool(val, c);
      } else if (key == "sampling_rate") {
        cfg.sampling_rate = to_double(val, c);
        if (cfg.sampling_rate < 0.0 || cfg.sampling_rate > 1.0) c.fail("sampling_rate must be in [0, 1]");
      } else {
        unknown();
      }
    } else {
      if (key == "k") {
        cfg.k = static_cast<int>(to_int(val, c, 1));
      } else if (key == "ma_mode") {
        cfg.ma_mode = parse_ma_mode(val);
      } else if (key == "decode") {
        if (val != "greedy" && val != "beam") c.fail("decode must be greedy or beam");
        cfg.decode = val;
      } else if (key == "beam_width") {
        cfg.beam_width = static_cast<int>(to_int(val, c, 1));
      } else if (key == "slack") {
        cfg.slack = static_cast<int>(to_int(val, c, 0));
      } else {
        unknown();
      }
    }
  }
  // validated here so a bad [model] block fails at load time; vocab_size is
  // filled in later from the data
  TransformerConfig probe = cfg.model;
  probe.vocab_size = Vocab::kNumSpecials + 1;
  try {
    probe.validate();
  } catch (const DataError& e) {
    throw UsageError(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(detail::read_file(path), path.parent_path(), path.string());
}

Alphabet config_alphabet(const RunConfig& cfg) {
  if (cfg.alphabet) return load_alphabet(*cfg.alphabet, cfg.mask_glyph);
  return Alphabet::ascii_lowercase();
}

GenerationTables load_generation_tables(const RunConfig& cfg,
                                        const Alphabet& alphabet) {
  GenerationTables tables;
  tables.mask_glyph = cfg.mask_glyph;
  tables.combined_units = alphabet.combined();
  for (const auto& [type, path] : cfg.tables) {
    ConfusionTable t = load_confusion_table(path);
    t.validate(alphabet);
    tables.tables[type] = std::move(t);
  }
  if (cfg.insertion_neighbors) {
    tables.insertion_neighbors = load_confusion_table(*cfg.insertion_neighbors);
  }
  return tables;
}

}  // namespace dpcspell
