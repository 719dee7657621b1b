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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vlscore/types.hpp"

namespace vlscore::stats {

struct RatingPair {
  std::string study_id;
  double metric_value = 0.0;
  double human_rating = 0.0;
};

// Pair counts behind tau-b. All counts are over unordered pairs.
struct KendallCounts {
  long long n = 0;
  long long pairs = 0;       // n0 = n(n-1)/2
  long long ties_x = 0;      // n1: pairs tied in x (including joint ties)
  long long ties_y = 0;      // n2: pairs tied in y (including joint ties)
  long long concordant_minus_discordant = 0;
};

// tau-b from counts; the same expression is used by every caller so that
// equal counts give bit-identical results.
double tau_b_from_counts(const KendallCounts& c);

// O(n log n): sort by (x, y), then count inversions of y with a merge sort
// while tracking tie groups.
KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y);

/// Tie-corrected Kendall rank correlation,
///   (C - D) / sqrt((n0 - n1)(n0 - n2)).
/// Throws InputError for fewer than two pairs, mismatched lengths, non-finite
/// values, or when either side is constant (tau-b is undefined).
double kendall_tau_b(std::span<const double> x, std::span<const double> y);
double kendall_tau_b(std::span<const RatingPair> pairs);

struct Contrast {
  std::string name;
  PerturbationKind minor{};
  PerturbationKind major{};
};

// Sentence removal (insignificant vs. pathology) and the two word-level
// contrasts (non-informative vs. location, non-informative vs. severity).
std::vector<Contrast> default_contrasts();

struct GroupStats {
  double mean = 0.0;
  std::size_t count = 0;
};

struct DeltaTable {
  std::map<std::pair<std::string, PerturbationKind>, GroupStats> rows;
  // delta = mean(minor) - mean(major)
  std::map<std::pair<std::string, std::string>, double> deltas;
  std::vector<std::string> metrics;
  std::vector<Contrast> contrasts;

  double delta(const std::string& metric, const std::string& contrast) const;
  double mean(const std::string& metric, PerturbationKind kind) const;
};

/// Per-(metric, kind) means and signed deltas for each contrast. Rows whose
/// study has no kind are ignored. Means are summed in sorted order so the
/// result does not depend on row order. Throws InputError when a contrast
/// names a kind with no rows for some metric.
DeltaTable delta_table(std::span<const ScoreRow> scores, const std::map<std::string, PerturbationKind>& kinds,
                       std::span<const Contrast> contrasts);

struct ScatterPoint {
  std::string study_id;
  double a = 0.0;
  double b = 0.0;
};

struct Scatter {
  std::vector<ScatterPoint> points;  // sorted by study_id
  double mean_a = 0.0;
  double mean_b = 0.0;
};

/// Joins two score columns on study_id. Both sides must cover the same
/// studies; otherwise InputError lists the orphans of each side.
Scatter scatter_export(std::span<const ScoreRow> scores_a, std::span<const ScoreRow> scores_b);

// CSV with header study_id,metric,value. Unknown metric names pass through.
// Errors carry the 1-based line number.
std::vector<ScoreRow> read_scores_csv(std::istream& in, const std::string& source = "<scores>");
std::vector<ScoreRow> import_external_scores(const std::filesystem::path& path);

enum class Aggregation { mean, sum };

/// Human ratings, one or more rows per study (one per rater), combined by
/// mean or sum. Header study_id,rating takes values as-is (higher is
/// better); header study_id,errors takes error counts and negates them.
std::map<std::string, double> read_ratings_csv(std::istream& in, Aggregation agg,
                                               const std::string& source = "<ratings>");
std::map<std::string, double> load_ratings(const std::filesystem::path& path, Aggregation agg);

// Splits a CSV line with optional double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace vlscore::stats
