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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vlscore/embeddings.hpp"
#include "vlscore/geometry.hpp"
#include "vlscore/perturb.hpp"
#include "vlscore/stats.hpp"
#include "vlscore/types.hpp"

namespace vlscore::pipeline {

struct MetricInfo {
  std::string name;
  bool needs_embeddings = false;
  // Dissimilarities (areas, radii) are negated before ranking.
  bool higher_is_better = true;
};

const std::vector<MetricInfo>& metric_registry();
// Throws InputError for an unregistered name.
const MetricInfo& metric_info(const std::string& name);

// Metrics compared in the similarity-measure ablation.
const std::vector<std::string>& ablation_metrics();

struct RunConfig {
  std::filesystem::path manifest_path;
  std::filesystem::path embeddings_path;
  std::filesystem::path lexicon_path;
  std::filesystem::path output_dir;
  std::filesystem::path ratings_path;
  std::filesystem::path external_scores_path;
  std::filesystem::path scores_path;
  std::vector<std::string> metrics;
  std::optional<double> constant_C;
  std::uint64_t seed = 0;
  stats::Aggregation aggregation = stats::Aggregation::mean;
  unsigned workers = 1;
  std::string scatter_x;
  std::string scatter_y;
};

struct SkippedScore {
  std::string study_id;
  std::string metric;
  std::string reason;
};

struct MetricSummary {
  double mean = 0.0;
  std::size_t count = 0;
};

struct ScoreRun {
  std::vector<ScoreRow> rows;  // sorted by (study_id, metric)
  std::vector<SkippedScore> skipped;
  std::map<std::string, MetricSummary> summary;
  std::size_t clamp_count = 0;
  double constant_C = 0.0;
  std::string model_tag;
  std::optional<stats::DeltaTable> deltas;
};

/// Scores every record with every metric on a pool of `workers` threads.
/// Records must carry candidate_text. Embedding metrics resolve the image id
/// and "<study_id>#ref" / "<study_id>#cand" in `store`, which may be null
/// when only text metrics are requested. Output order does not depend on
/// the worker count.
ScoreRun score_records(std::span<const StudyRecord> records, const EmbeddingStore* store,
                       std::span<const std::string> metrics, double constant_C, unsigned workers = 1);

// Loads inputs, scores, writes scores.csv and summary.json (plus deltas.json
// when records carry perturbation tags) and prints a text summary.
ScoreRun cmd_score(const RunConfig& cfg, std::ostream& log);

struct PerturbRun {
  perturb::Suite suite;
  std::filesystem::path suite_path;
};

// Lexicon comes from cfg.lexicon_path, else $VLSCORE_LEXICON. Writes suite.jsonl.
PerturbRun cmd_perturb(const RunConfig& cfg, std::ostream& log);

struct TauRow {
  std::string metric;
  double tau = 0.0;
  std::size_t n = 0;
};

struct TauTable {
  std::vector<TauRow> rows;  // sorted by tau, descending
  stats::Aggregation aggregation = stats::Aggregation::mean;
};

/// Kendall tau-b of each metric against the ratings, in the order given.
/// Every scored study needs a rating and vice versa; orphans are reported in
/// the error. A metric with skipped (undefined) scores is an error.
TauTable correlate_scores(std::span<const ScoreRow> scores, std::span<const std::string> metrics,
                          const std::map<std::string, double>& ratings,
                          std::span<const SkippedScore> skipped = {});

// Scores cfg.metrics (and any external score columns), correlates with
// cfg.ratings_path and writes tau.json.
TauTable cmd_correlate(const RunConfig& cfg, std::ostream& log);

// cmd_correlate over the four embedding similarity measures.
TauTable cmd_ablate(const RunConfig& cfg, std::ostream& log);

struct CalibrateRun {
  geometry::Calibration calibration;
  std::optional<std::filesystem::path> calibrated_store;
};

// Largest triangle area over the manifest triplets; writes calibration.json
// and, when the area is positive, calibrated.vlse carrying it as C.
CalibrateRun cmd_calibrate(const RunConfig& cfg, std::ostream& log);

// Reads cfg.scores_path, joins metrics cfg.scatter_x and cfg.scatter_y and
// writes scatter.csv.
stats::Scatter cmd_scatter(const RunConfig& cfg, std::ostream& log);

// Serializers shared by the commands; exposed for tests.
void write_scores_csv(std::ostream& out, std::span<const ScoreRow> rows);
std::string format_number(double v);
std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

}  // namespace vlscore::pipeline
