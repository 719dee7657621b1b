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

// vlscore: batch evaluation of generated radiology reports.
//
//   vlscore score     --manifest m.jsonl --embeddings e.vlse --metrics vlscore,bleu1 --output out/
//   vlscore perturb   --manifest m.jsonl --lexicon data/default_lexicon.json --seed 7 --output out/
//   vlscore correlate --manifest m.jsonl --embeddings e.vlse --metrics vlscore --ratings r.csv --output out/
//   vlscore ablate    --manifest m.jsonl --embeddings e.vlse --ratings r.csv --output out/
//   vlscore calibrate --manifest m.jsonl --embeddings e.vlse --output out/
//   vlscore scatter   --scores out/scores.csv --x vlscore --y bleu4 --output out/
//
// Exit codes: 0 success, 1 input error, 2 internal-consistency error.

#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "vlscore/error.hpp"
#include "vlscore/pipeline.hpp"

namespace {

using vlscore::pipeline::RunConfig;

void add_common(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--output", cfg.output_dir, "Output directory")->required();
}

void add_inputs(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--manifest", cfg.manifest_path, "Study manifest (JSON Lines)")->required();
  cmd->add_option("--embeddings", cfg.embeddings_path, "Embedding store (.vlse)");
  cmd->add_option("--constant", cfg.constant_C, "Override the store's normalizer C")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", cfg.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
}

void add_ratings(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--ratings", cfg.ratings_path, "Human ratings CSV (study_id,rating or study_id,errors)")
      ->required();
  cmd->add_option("--aggregation", cfg.aggregation, "Combine several ratings per study")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, vlscore::stats::Aggregation>{{"mean", vlscore::stats::Aggregation::mean},
                                                             {"sum", vlscore::stats::Aggregation::sum}}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-grounded evaluation of radiology reports"};
  app.require_subcommand(1);
  RunConfig cfg;
  cfg.workers = std::max(1u, std::thread::hardware_concurrency());

  auto* score = app.add_subcommand("score", "Score candidate reports against references");
  add_inputs(score, cfg);
  score->add_option("--metrics", cfg.metrics, "Comma-separated metric names")->delimiter(',')->required();
  add_common(score, cfg);

  auto* perturb = app.add_subcommand("perturb", "Build the perturbed evaluation suite");
  perturb->add_option("--manifest", cfg.manifest_path, "Study manifest (JSON Lines)")->required();
  perturb->add_option("--lexicon", cfg.lexicon_path, "Lexicon JSON (falls back to $VLSCORE_LEXICON)");
  perturb->add_option("--seed", cfg.seed, "Random seed");
  add_common(perturb, cfg);

  auto* correlate = app.add_subcommand("correlate", "Kendall tau-b of metrics against human ratings");
  correlate->add_option("--manifest", cfg.manifest_path, "Study manifest (JSON Lines)");
  correlate->add_option("--embeddings", cfg.embeddings_path, "Embedding store (.vlse)");
  correlate->add_option("--constant", cfg.constant_C, "Override the store's normalizer C")
      ->check(CLI::PositiveNumber);
  correlate->add_option("--jobs", cfg.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
  correlate->add_option("--metrics", cfg.metrics, "Comma-separated metric names")->delimiter(',');
  correlate->add_option("--external", cfg.external_scores_path, "Extra score columns (study_id,metric,value)");
  add_ratings(correlate, cfg);
  add_common(correlate, cfg);

  auto* ablate = app.add_subcommand("ablate", "Compare embedding similarity measures against ratings");
  add_inputs(ablate, cfg);
  add_ratings(ablate, cfg);
  add_common(ablate, cfg);

  auto* calibrate = app.add_subcommand("calibrate", "Set C to the largest triangle area of a dataset");
  calibrate->add_option("--manifest", cfg.manifest_path, "Study manifest (JSON Lines)")->required();
  calibrate->add_option("--embeddings", cfg.embeddings_path, "Embedding store (.vlse)")->required();
  add_common(calibrate, cfg);

  auto* scatter = app.add_subcommand("scatter", "Per-study points of two metrics from a scores.csv");
  scatter->add_option("--scores", cfg.scores_path, "scores.csv from a score run")->required();
  scatter->add_option("--x", cfg.scatter_x, "First metric")->required();
  scatter->add_option("--y", cfg.scatter_y, "Second metric")->required();
  add_common(scatter, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  namespace p = vlscore::pipeline;
  try {
    if (*score) p::cmd_score(cfg, std::cout);
    if (*perturb) p::cmd_perturb(cfg, std::cout);
    if (*correlate) p::cmd_correlate(cfg, std::cout);
    if (*ablate) p::cmd_ablate(cfg, std::cout);
    if (*scatter) p::cmd_scatter(cfg, std::cout);
    if (*calibrate) {
      auto run = p::cmd_calibrate(cfg, std::cout);
      if (!run.calibrated_store) return 1;
    }
  } catch (const vlscore::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const vlscore::ConsistencyError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
