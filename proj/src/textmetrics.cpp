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

#include "vlscore/textmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "vlscore/error.hpp"
#include "vlscore/text_util.hpp"

namespace vlscore::text {

namespace {

constexpr std::string_view kSplitPunct = ".,:;!?()";

bool is_split_punct(char c) { return kSplitPunct.find(c) != std::string_view::npos; }

void push_word(TokenSequence& out, std::string_view word) {
  if (word.empty()) return;
  auto lower = to_lower(word);
  if (lower == "[unk]") {
    out.emplace_back(kUnknownToken);
  } else {
    out.push_back(std::move(lower));
  }
}

using NgramCounts = std::map<std::string, int>;

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    std::string_view chunk = text.substr(i, j - i);
    i = j;
    if (chunk.empty()) continue;

    std::size_t b = 0;
    while (b < chunk.size() && is_split_punct(chunk[b])) ++b;
    std::size_t e = chunk.size();
    while (e > b && is_split_punct(chunk[e - 1])) --e;
    for (std::size_t k = 0; k < b; ++k) out.emplace_back(1, chunk[k]);
    push_word(out, chunk.substr(b, e - b));
    for (std::size_t k = e; k < chunk.size(); ++k) out.emplace_back(1, chunk[k]);
  }
  return out;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (k) out += ' ';
    out += tokens[k];
  }
  return out;
}

BleuScore bleu(std::span<const std::string> reference, std::span<const std::string> candidate, int max_n) {
  if (max_n < 1 || max_n > 4) throw InputError("bleu: max_n must be in 1..4");
  if (candidate.empty()) return {0.0, true};

  double log_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= max_n; ++n) {
    // An order neither side is long enough to contain carries no evidence.
    if (candidate.size() < static_cast<std::size_t>(n) && reference.size() < static_cast<std::size_t>(n)) break;
    ++orders;
    const auto cand_counts = count_ngrams(candidate, static_cast<std::size_t>(n));
    const auto ref_counts = count_ngrams(reference, static_cast<std::size_t>(n));
    int total = 0;
    int clipped = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) clipped += std::min(count, it->second);
    }
    const double precision = clipped > 0 ? static_cast<double>(clipped) / total : kBleuEpsilon;
    log_sum += std::log(precision);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return {brevity * std::exp(log_sum / orders), false};
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const std::string> reference, std::span<const std::string> candidate) {
  if (reference.empty() || candidate.empty()) return 0.0;
  const double l = static_cast<double>(lcs_length(reference, candidate));
  if (l == 0.0) return 0.0;
  const double p = l / static_cast<double>(candidate.size());
  const double r = l / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

MeteorAlignment meteor_align(std::span<const std::string> reference, std::span<const std::string> candidate) {
  std::unordered_map<std::string_view, std::vector<std::size_t>> positions;
  for (std::size_t j = 0; j < reference.size(); ++j) positions[reference[j]].push_back(j);
  std::vector<bool> used(reference.size(), false);

  MeteorAlignment a;
  bool have_prev = false;
  std::size_t prev_ref = 0;
  for (const auto& tok : candidate) {
    auto it = positions.find(tok);
    if (it == positions.end()) {
      have_prev = false;
      continue;
    }
    std::size_t chosen = reference.size();
    if (have_prev && prev_ref + 1 < reference.size() && !used[prev_ref + 1] && reference[prev_ref + 1] == tok) {
      chosen = prev_ref + 1;
    } else {
      for (std::size_t j : it->second) {
        if (!used[j]) {
          chosen = j;
          break;
        }
      }
    }
    if (chosen == reference.size()) {
      have_prev = false;
      continue;
    }
    used[chosen] = true;
    ++a.matches;
    if (!have_prev || chosen != prev_ref + 1) ++a.chunks;
    have_prev = true;
    prev_ref = chosen;
  }
  return a;
}

double meteor_lite(std::span<const std::string> reference, std::span<const std::string> candidate,
                   const MeteorParams& params) {
  const auto a = meteor_align(reference, candidate);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double f_mean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  // A complete single-chunk match carries no fragmentation.
  const bool exact = a.chunks == 1 && a.matches == reference.size() && a.matches == candidate.size();
  const double penalty = exact ? 0.0 : params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
  return f_mean * (1.0 - penalty);
}

}  // namespace vlscore::text
