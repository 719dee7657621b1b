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

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vlscore::text {

// Lowercased tokens from `tokenize`. The literal "[UNK]" keeps its case.
using TokenSequence = std::vector<std::string>;

inline constexpr std::string_view kUnknownToken = "[UNK]";

/// Whitespace split, then leading and trailing characters from ".,:;!?()"
/// become one-character tokens of their own. Interior punctuation such as the
/// point in "3.5" stays inside the word.
TokenSequence tokenize(std::string_view text);

std::string join(std::span<const std::string> tokens);

inline constexpr double kBleuEpsilon = 1e-9;

struct BleuScore {
  double value = 0.0;
  bool empty_candidate = false;
};

/// Sentence-level BLEU with clipped n-gram precisions for n = 1..max_n,
/// their geometric mean, and brevity penalty exp(1 - r/c) when c <= r.
/// A zero precision is replaced by kBleuEpsilon. Orders longer than both
/// sequences are left out of the mean. An empty candidate scores 0 and sets
/// the flag. max_n must be in 1..4.
BleuScore bleu(std::span<const std::string> reference, std::span<const std::string> candidate, int max_n);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// LCS F1: 2PR/(P+R) with P = L/|cand| and R = L/|ref|.
double rouge_l(std::span<const std::string> reference, std::span<const std::string> candidate);

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

// One-to-one exact-match alignment, greedy left to right over the candidate,
// continuing the current chunk whenever the next reference token allows it.
MeteorAlignment meteor_align(std::span<const std::string> reference, std::span<const std::string> candidate);

/// Exact-match METEOR: F_mean * (1 - gamma * (chunks/matches)^beta) with
/// F_mean = PR / (alpha P + (1 - alpha) R). No stemming or synonyms.
/// When both sides are matched completely in one chunk the penalty is 0,
/// so identical sequences score exactly 1.
double meteor_lite(std::span<const std::string> reference, std::span<const std::string> candidate,
                   const MeteorParams& params = {});

}  // namespace vlscore::text
