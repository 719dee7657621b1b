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

#include "vlscore/perturb.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vlscore/error.hpp"
#include "vlscore/text_util.hpp"
#include "vlscore/textmetrics.hpp"

namespace vlscore::perturb {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 12> kAbbreviations = {
    "dr.", "mr.", "mrs.", "ms.", "a.m.", "p.m.", "e.g.", "i.e.", "vs.", "approx.", "fig.", "cf.",
};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// True when the word ending at `end` (period included) is a known abbreviation.
bool ends_with_abbreviation(std::string_view text, std::size_t end) {
  std::size_t b = end;
  while (b > 0 && !is_space(text[b - 1])) --b;
  std::string word = to_lower(text.substr(b, end - b));
  while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'')) word.erase(0, 1);
  for (auto abbr : kAbbreviations) {
    if (word == abbr) return true;
  }
  return false;
}

std::uint64_t pick(std::uint64_t seed, std::uint64_t salt, std::size_t n) {
  return mix_seed(seed, salt) % n;
}

bool ascii_iequal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    char x = a[k];
    char y = b[k];
    if (x >= 'A' && x <= 'Z') x = static_cast<char>(x - 'A' + 'a');
    if (y >= 'A' && y <= 'Z') y = static_cast<char>(y - 'A' + 'a');
    if (x != y) return false;
  }
  return true;
}

std::vector<std::size_t> find_term(std::string_view text, std::string_view term) {
  std::vector<std::size_t> hits;
  if (term.empty() || term.size() > text.size()) return hits;
  for (std::size_t p = 0; p + term.size() <= text.size(); ++p) {
    if (p > 0 && is_word_char(text[p - 1])) continue;
    const std::size_t e = p + term.size();
    if (e < text.size() && is_word_char(text[e])) continue;
    // Skip pieces of dotted tokens such as "a.m." or "3.5".
    if (p > 1 && text[p - 1] == '.' && is_word_char(text[p - 2])) continue;
    if (e + 1 < text.size() && text[e] == '.' && is_word_char(text[e + 1])) continue;
    if (ascii_iequal(text.substr(p, term.size()), term)) hits.push_back(p);
  }
  return hits;
}

bool contains_phrase(std::string_view text, std::string_view phrase) {
  const std::string hay = to_lower(text);
  return hay.find(to_lower(phrase)) != std::string::npos;
}

// Keeps the capitalization pattern of the word being replaced.
std::string match_case(std::string_view original, std::string_view replacement) {
  std::string out(replacement);
  if (out.empty() || out == text::kUnknownToken) return out;
  const bool all_upper = original.size() > 1 && std::all_of(original.begin(), original.end(), [](char c) {
                           return !(c >= 'a' && c <= 'z');
                         });
  if (all_upper) {
    for (auto& c : out) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
  } else if (original[0] >= 'A' && original[0] <= 'Z' && out[0] >= 'a' && out[0] <= 'z') {
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  }
  return out;
}

PerturbationOutcome unchanged(std::string_view report, PerturbationKind kind) {
  PerturbationOutcome o;
  o.original = std::string(report);
  o.perturbed = o.original;
  o.kind = kind;
  return o;
}

std::string without_sentence(const std::vector<Sentence>& sentences, std::size_t idx) {
  std::vector<Sentence> kept;
  kept.reserve(sentences.size());
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    if (k != idx) kept.push_back(sentences[k]);
  }
  // Dropping the last sentence: the new last one takes over the final gap.
  if (idx + 1 == sentences.size() && !kept.empty()) kept.back().trailing = sentences[idx].trailing;
  return join_sentences(kept);
}

PerturbationOutcome remove_sentence_where(std::string_view report, PerturbationKind kind, std::uint64_t seed,
                                          const auto& eligible) {
  auto out = unchanged(report, kind);
  const auto sentences = split_sentences(report);
  // Removing the only sentence would leave no report.
  if (sentences.size() < 2) return out;
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    if (eligible(sentences[k].text)) candidates.push_back(k);
  }
  if (candidates.empty()) return out;
  const std::size_t idx = candidates[pick(seed, 0, candidates.size())];
  out.perturbed = without_sentence(sentences, idx);
  out.edit_span = {idx, 0, text::tokenize(sentences[idx].text).size()};
  out.applied = true;
  return out;
}

struct Occurrence {
  std::size_t pos = 0;
  std::size_t len = 0;
  std::string term;
};

std::vector<Occurrence> occurrences(std::string_view report, std::span<const std::string> terms) {
  std::vector<Occurrence> hits;
  for (const auto& term : terms) {
    for (auto p : find_term(report, term)) hits.push_back({p, term.size(), term});
  }
  std::sort(hits.begin(), hits.end(), [](const Occurrence& a, const Occurrence& b) { return a.pos < b.pos; });
  return hits;
}

EditSpan locate(std::string_view report, std::size_t pos) {
  const auto sentences = split_sentences(report);
  std::size_t start = 0;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const std::size_t end = start + sentences[k].text.size() + sentences[k].trailing.size();
    if (pos < end || k + 1 == sentences.size()) {
      std::string_view prefix = std::string_view(sentences[k].text).substr(0, pos - start);
      std::size_t token = text::tokenize(prefix).size();
      // The prefix ends inside a chunk, so its last token is the edited one.
      if (!prefix.empty() && !is_space(prefix.back()) && std::string_view(".,:;!?()").find(prefix.back()) ==
                                                              std::string_view::npos) {
        --token;
      }
      return {k, token, token + 1};
    }
    start = end;
  }
  return {};
}

PerturbationOutcome replace_occurrence(std::string_view report, PerturbationKind kind, const Occurrence& occ,
                                       std::string_view replacement) {
  auto out = unchanged(report, kind);
  const std::string_view original = report.substr(occ.pos, occ.len);
  out.perturbed = std::string(report.substr(0, occ.pos)) + match_case(original, replacement) +
                  std::string(report.substr(occ.pos + occ.len));
  out.edit_span = locate(report, occ.pos);
  out.applied = true;
  return out;
}

std::vector<std::string> string_list(const json& doc, const char* key, const std::string& source) {
  auto it = doc.find(key);
  if (it == doc.end()) throw InputError(source + ": missing field \"" + std::string(key) + "\"");
  if (!it->is_array()) throw InputError(source + ": field \"" + std::string(key) + "\" must be an array");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw InputError(source + ": field \"" + std::string(key) + "\" must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

void require_lowercase_word_list(std::span<const std::string> terms, const char* field, bool single_word) {
  for (const auto& t : terms) {
    if (trim(t).empty()) throw InputError(std::string("lexicon: empty entry in ") + field);
    if (to_lower(t) != t) throw InputError(std::string("lexicon: entry \"") + t + "\" in " + field + " is not lowercase");
    if (single_word && text::tokenize(t).size() != 1) {
      throw InputError(std::string("lexicon: entry \"") + t + "\" in " + field + " must be a single word");
    }
  }
}

}  // namespace

void Lexicon::validate() const {
  require_lowercase_word_list(pathology_terms, "pathology_terms", false);
  require_lowercase_word_list(insignificant_phrases, "insignificant_phrases", false);
  require_lowercase_word_list(noninformative_words, "noninformative_words", true);

  std::set<std::string> swap_words;
  for (const auto& [a, b] : location_swaps) {
    std::array<std::string, 2> pair = {a, b};
    require_lowercase_word_list(pair, "location_swaps", true);
    if (a == b) throw InputError("lexicon: location pair (" + a + ", " + b + ") swaps a word with itself");
    for (const auto& w : pair) {
      if (!swap_words.insert(w).second) throw InputError("lexicon: word \"" + w + "\" appears in two location pairs");
    }
  }

  for (const auto& ladder : severity_ladders) {
    if (ladder.size() < 3) throw InputError("lexicon: a severity ladder needs at least 3 rungs");
    require_lowercase_word_list(ladder, "severity_ladder", true);
    std::set<std::string> rungs(ladder.begin(), ladder.end());
    if (rungs.size() != ladder.size()) throw InputError("lexicon: severity ladder repeats a rung");
  }

  for (const auto& s : normal_sentences) {
    if (trim(s).empty()) throw InputError("lexicon: empty normal sentence");
    if (contains_any_term(s, pathology_terms)) {
      throw InputError("lexicon: normal sentence \"" + s + "\" mentions a pathology term");
    }
  }
}

Lexicon parse_lexicon(std::string_view json_text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) throw InputError(source + ": lexicon must be a JSON object");

  Lexicon lex;
  lex.pathology_terms = string_list(doc, "pathology_terms", source);
  lex.insignificant_phrases = string_list(doc, "insignificant_phrases", source);
  lex.noninformative_words = string_list(doc, "noninformative_words", source);
  lex.normal_sentences = string_list(doc, "normal_sentences", source);

  auto swaps = doc.find("location_swaps");
  if (swaps == doc.end() || !swaps->is_array()) throw InputError(source + ": location_swaps must be an array");
  for (const auto& pair : *swaps) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
      throw InputError(source + ": each location_swaps entry must be a pair of strings");
    }
    lex.location_swaps.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
  }

  auto ladder = doc.find("severity_ladder");
  if (ladder == doc.end() || !ladder->is_array()) throw InputError(source + ": severity_ladder must be an array");
  const bool nested = !ladder->empty() && (*ladder)[0].is_array();
  auto read_ladder = [&](const json& arr) {
    std::vector<std::string> rungs;
    for (const auto& v : arr) {
      if (!v.is_string()) throw InputError(source + ": severity_ladder rungs must be strings");
      rungs.push_back(v.get<std::string>());
    }
    return rungs;
  };
  if (nested) {
    for (const auto& arr : *ladder) {
      if (!arr.is_array()) throw InputError(source + ": severity_ladder mixes arrays and strings");
      lex.severity_ladders.push_back(read_ladder(arr));
    }
  } else if (!ladder->empty()) {
    lex.severity_ladders.push_back(read_ladder(*ladder));
  }

  lex.validate();
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open lexicon " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str(), path.string());
}

std::vector<Sentence> split_sentences(std::string_view report) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < report.size()) {
    if (!is_terminator(report[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < report.size() && is_terminator(report[end])) ++end;
    if (end < report.size() && !is_space(report[end])) {
      i = end;
      continue;
    }
    if (report[end - 1] == '.' && end - i == 1 && ends_with_abbreviation(report, end)) {
      i = end;
      continue;
    }
    std::size_t gap = end;
    while (gap < report.size() && is_space(report[gap])) ++gap;
    out.push_back({std::string(report.substr(start, end - start)), std::string(report.substr(end, gap - end))});
    start = gap;
    i = gap;
  }
  if (start < report.size()) {
    std::string_view rest = report.substr(start);
    std::size_t body = rest.size();
    while (body > 0 && is_space(rest[body - 1])) --body;
    out.push_back({std::string(rest.substr(0, body)), std::string(rest.substr(body))});
  }
  return out;
}

std::string join_sentences(std::span<const Sentence> sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += s.text;
    out += s.trailing;
  }
  return out;
}

bool contains_term(std::string_view text, std::string_view term) { return !find_term(text, term).empty(); }

bool contains_any_term(std::string_view text, std::span<const std::string> terms) {
  return std::any_of(terms.begin(), terms.end(), [&](const std::string& t) { return contains_term(text, t); });
}

PerturbationOutcome remove_pathology_sentence(std::string_view report, const Lexicon& lex, std::uint64_t seed) {
  return remove_sentence_where(report, PerturbationKind::RemovePathologySentence, seed, [&](std::string_view s) {
    return contains_any_term(s, lex.pathology_terms);
  });
}

PerturbationOutcome remove_insignificant_sentence(std::string_view report, const Lexicon& lex,
                                                  std::uint64_t seed) {
  return remove_sentence_where(report, PerturbationKind::RemoveInsignificantSentence, seed, [&](std::string_view s) {
    const bool general = std::any_of(lex.insignificant_phrases.begin(), lex.insignificant_phrases.end(),
                                     [&](const std::string& p) { return contains_phrase(s, p); });
    return general && !contains_any_term(s, lex.pathology_terms);
  });
}

PerturbationOutcome swap_location_word(std::string_view report, const Lexicon& lex, std::uint64_t seed) {
  std::map<std::string, std::string> partner;
  std::vector<std::string> words;
  for (const auto& [a, b] : lex.location_swaps) {
    partner[a] = b;
    partner[b] = a;
    words.push_back(a);
    words.push_back(b);
  }
  const auto hits = occurrences(report, words);
  if (hits.empty()) return unchanged(report, PerturbationKind::SwapLocation);
  const auto& occ = hits[pick(seed, 0, hits.size())];
  return replace_occurrence(report, PerturbationKind::SwapLocation, occ, partner.at(occ.term));
}

PerturbationOutcome swap_severity_word(std::string_view report, const Lexicon& lex, std::uint64_t seed) {
  std::vector<std::string> words;
  for (const auto& ladder : lex.severity_ladders) words.insert(words.end(), ladder.begin(), ladder.end());
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());

  const auto hits = occurrences(report, words);
  if (hits.empty()) return unchanged(report, PerturbationKind::SwapSeverity);
  const auto& occ = hits[pick(seed, 0, hits.size())];

  const auto& ladder = *std::find_if(lex.severity_ladders.begin(), lex.severity_ladders.end(), [&](const auto& l) {
    return std::find(l.begin(), l.end(), occ.term) != l.end();
  });
  const auto rung = static_cast<std::ptrdiff_t>(std::find(ladder.begin(), ladder.end(), occ.term) - ladder.begin());
  std::ptrdiff_t farthest = 0;
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(ladder.size()); ++k) {
    farthest = std::max(farthest, std::abs(k - rung));
  }
  const std::ptrdiff_t min_step = farthest >= 2 ? 2 : farthest;
  std::vector<std::string> choices;
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(ladder.size()); ++k) {
    if (std::abs(k - rung) >= min_step && k != rung) choices.push_back(ladder[static_cast<std::size_t>(k)]);
  }
  return replace_occurrence(report, PerturbationKind::SwapSeverity, occ, choices[pick(seed, 1, choices.size())]);
}

PerturbationOutcome mask_noninformative_word(std::string_view report, const Lexicon& lex, std::uint64_t seed) {
  const auto hits = occurrences(report, lex.noninformative_words);
  if (hits.empty()) return unchanged(report, PerturbationKind::MaskNonInformative);
  return replace_occurrence(report, PerturbationKind::MaskNonInformative, hits[pick(seed, 0, hits.size())],
                            text::kUnknownToken);
}

std::string build_normal_report(const Lexicon& lex) {
  if (lex.normal_sentences.empty()) throw InputError("lexicon has no normal sentences");
  std::string out;
  for (const auto& s : lex.normal_sentences) {
    if (!out.empty()) out += ' ';
    out += trim(s);
  }
  return out;
}

PerturbationOutcome substitute_normal_report(std::string_view report, const Lexicon& lex) {
  auto out = unchanged(report, PerturbationKind::NormalReportSubstitution);
  if (contains_any_term(report, lex.pathology_terms)) return out;
  out.perturbed = build_normal_report(lex);
  out.edit_span = {0, 0, text::tokenize(out.perturbed).size()};
  out.applied = true;
  return out;
}

PerturbationOutcome apply_perturbation(PerturbationKind kind, std::string_view report, const Lexicon& lex,
                                       std::uint64_t seed) {
  switch (kind) {
    case PerturbationKind::RemovePathologySentence:
      return remove_pathology_sentence(report, lex, seed);
    case PerturbationKind::RemoveInsignificantSentence:
      return remove_insignificant_sentence(report, lex, seed);
    case PerturbationKind::SwapLocation:
      return swap_location_word(report, lex, seed);
    case PerturbationKind::SwapSeverity:
      return swap_severity_word(report, lex, seed);
    case PerturbationKind::MaskNonInformative:
      return mask_noninformative_word(report, lex, seed);
    case PerturbationKind::NormalReportSubstitution:
      return substitute_normal_report(report, lex);
  }
  return unchanged(report, kind);
}

std::string suite_study_id(std::string_view study_id, PerturbationKind kind) {
  return std::string(study_id) + "/" + std::string(to_string(kind));
}

Suite generate_suite(std::span<const StudyRecord> records, const Lexicon& lex, std::uint64_t seed) {
  Suite suite;
  for (const auto& rec : records) {
    const std::uint64_t record_seed = seed ^ stable_hash(rec.study_id);
    for (std::size_t k = 0; k < kAllPerturbationKinds.size(); ++k) {
      const auto kind = kAllPerturbationKinds[k];
      auto outcome = apply_perturbation(kind, rec.reference_text, lex, mix_seed(record_seed, k));
      ++suite.counts[k].attempted;
      if (!outcome.applied) continue;
      ++suite.counts[k].applied;
      StudyRecord out;
      out.study_id = suite_study_id(rec.study_id, kind);
      out.image_id = rec.image_id;
      out.reference_text = rec.reference_text;
      out.candidate_text = std::move(outcome.perturbed);
      out.perturbation = kind;
      out.split = rec.split;
      suite.records.push_back(std::move(out));
    }
  }
  return suite;
}

}  // namespace vlscore::perturb
