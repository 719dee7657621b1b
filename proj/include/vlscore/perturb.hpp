// Copyright 2026 The VLScore Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vlscore/types.hpp"

namespace vlscore::perturb {

/// Term lists that drive the six report perturbations.
///
/// Term lists are lowercase and matched case-insensitively. Swap, severity
/// and non-informative entries are single words so that each edit replaces
/// exactly one token. A word may appear in at most one location pair.
/// Severity terms come in ladders of at least three rungs, ordered from
/// mildest to most severe; a term listed in several ladders uses the first.
struct Lexicon {
  std::vector<std::string> pathology_terms;
  std::vector<std::string> insignificant_phrases;
  std::vector<std::pair<std::string, std::string>> location_swaps;
  std::vector<std::vector<std::string>> severity_ladders;
  std::vector<std::string> noninformative_words;
  std::vector<std::string> normal_sentences;

  // Throws InputError describing the first violated rule.
  void validate() const;
};

// JSON object with keys pathology_terms, insignificant_phrases,
// location_swaps (array of 2-element arrays), severity_ladder (one array of
// strings, or an array of such arrays), noninformative_words and
// normal_sentences. The result is validated.
Lexicon parse_lexicon(std::string_view json_text, const std::string& source = "<lexicon>");
Lexicon load_lexicon(const std::filesystem::path& path);

inline constexpr const char* kLexiconEnvVar = "VLSCORE_LEXICON";

struct Sentence {
  std::string text;
  std::string trailing;  // whitespace after the sentence

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Boundaries are runs of '.', '!' or '?' followed by whitespace or the end
// of input, except after known abbreviations ("dr.", "e.g.", "a.m." ...).
// Joining text + trailing over the result reproduces the input exactly.
std::vector<Sentence> split_sentences(std::string_view report);
std::string join_sentences(std::span<const Sentence> sentences);

struct EditSpan {
  std::size_t sentence = 0;
  std::size_t token_begin = 0;  // token range within that sentence
  std::size_t token_end = 0;
};

struct PerturbationOutcome {
  std::string original;
  std::string perturbed;
  PerturbationKind kind{};
  EditSpan edit_span;
  bool applied = false;
};

// True when `text` contains `term` bounded by non-word characters on both
// sides, ignoring ASCII case.
bool contains_term(std::string_view text, std::string_view term);
bool contains_any_term(std::string_view text, std::span<const std::string> terms);

// Sentence removal applies only to reports with at least two sentences.
PerturbationOutcome remove_pathology_sentence(std::string_view report, const Lexicon& lex, std::uint64_t seed);
PerturbationOutcome remove_insignificant_sentence(std::string_view report, const Lexicon& lex,
                                                  std::uint64_t seed);
PerturbationOutcome swap_location_word(std::string_view report, const Lexicon& lex, std::uint64_t seed);
PerturbationOutcome swap_severity_word(std::string_view report, const Lexicon& lex, std::uint64_t seed);
PerturbationOutcome mask_noninformative_word(std::string_view report, const Lexicon& lex, std::uint64_t seed);

// Normal sentences joined by single spaces. Throws InputError when empty.
std::string build_normal_report(const Lexicon& lex);

// Replaces a report that mentions no pathology term with the normal report.
PerturbationOutcome substitute_normal_report(std::string_view report, const Lexicon& lex);

PerturbationOutcome apply_perturbation(PerturbationKind kind, std::string_view report, const Lexicon& lex,
                                       std::uint64_t seed);

struct KindCount {
  std::size_t attempted = 0;
  std::size_t applied = 0;
};

struct Suite {
  std::vector<StudyRecord> records;
  std::array<KindCount, 6> counts{};

  const KindCount& count(PerturbationKind kind) const { return counts[static_cast<std::size_t>(kind)]; }
};

// Id of the record derived from `study_id` by `kind`.
std::string suite_study_id(std::string_view study_id, PerturbationKind kind);

/// Tries every kind on every reference report and emits one record per
/// successful edit, with candidate_text set to the perturbed report. Each
/// record gets its own seed, seed ^ hash(study_id), so the result does not
/// depend on processing order.
Suite generate_suite(std::span<const StudyRecord> records, const Lexicon& lex, std::uint64_t seed);

}  // namespace vlscore::perturb
