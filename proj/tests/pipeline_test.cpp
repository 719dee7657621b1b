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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "vlscore/error.hpp"
#include "vlscore/manifest.hpp"
#include "vlscore/pipeline.hpp"

namespace vlscore::pipeline {
namespace {

namespace fs = std::filesystem;

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(::testing::TempDir()) / (std::string("vlscore_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  void write_text(const std::string& name, const std::string& body) const {
    std::ofstream(path(name), std::ios::binary) << body;
  }

  fs::path dir_;
};

StudyRecord record(const std::string& id, std::optional<PerturbationKind> kind = std::nullopt) {
  return {id, id + "_img", "No pleural effusion.", std::string("No effusion."), kind, std::nullopt};
}

// Adds a dim-2 triplet with integer coordinates so that areas are exact.
void add_triplet(EmbeddingStore& store, const std::string& study, std::array<double, 2> i, std::array<double, 2> g,
                 std::array<double, 2> r) {
  store.add(study + "_img", Vector({i[0], i[1]}));
  store.add(candidate_embedding_id(study), Vector({g[0], g[1]}));
  store.add(reference_embedding_id(study), Vector({r[0], r[1]}));
}

TEST_F(PipelineTest, ScoresOneRowPerRecordAndMetric) {
  EmbeddingStore store(2, "m", geometry::kDefaultConstantC);
  add_triplet(store, "s1", {0, 0}, {3, 0}, {0, 4});
  add_triplet(store, "s0", {1, 1}, {1, 1}, {1, 1});
  std::vector<StudyRecord> recs = {record("s1"), record("s0")};
  const std::vector<std::string> metrics = {"vlscore", "bleu1"};
  const auto run = score_records(recs, &store, metrics, 890.0);
  ASSERT_EQ(run.rows.size(), 4u);
  EXPECT_EQ(run.rows[0], (ScoreRow{"s0", "bleu1", run.rows[0].value}));
  EXPECT_EQ(run.rows[1], (ScoreRow{"s0", "vlscore", 1.0}));
  EXPECT_EQ(run.rows[3].study_id, "s1");
  EXPECT_EQ(run.rows[3].metric, "vlscore");
  EXPECT_NEAR(run.rows[3].value, 0.9932584, 1e-7);
  EXPECT_EQ(run.rows[3].value, 1.0 - 6.0 / 890.0);
  EXPECT_EQ(run.clamp_count, 0u);
  EXPECT_EQ(run.summary.at("vlscore").count, 2u);
}

TEST_F(PipelineTest, ReportsClampsAndSkips) {
  EmbeddingStore store(2, "m", 1.0);
  add_triplet(store, "big", {0, 0}, {3, 0}, {0, 4});
  add_triplet(store, "zero", {0, 0}, {0, 0}, {1, 0});
  std::vector<StudyRecord> recs = {record("big"), record("zero")};
  const std::vector<std::string> metrics = {"vlscore", "cosine"};
  const auto run = score_records(recs, &store, metrics, 1.0);
  EXPECT_EQ(run.clamp_count, 1u);
  ASSERT_EQ(run.skipped.size(), 1u);
  EXPECT_EQ(run.skipped[0].study_id, "zero");
  EXPECT_EQ(run.skipped[0].metric, "cosine");
  EXPECT_EQ(run.rows.size(), recs.size() * metrics.size() - run.skipped.size());
}

TEST_F(PipelineTest, InputErrors) {
  EmbeddingStore store(2, "m", 890.0);
  add_triplet(store, "s1", {0, 0}, {3, 0}, {0, 4});
  std::vector<StudyRecord> recs = {record("s1"), record("s2")};
  const std::vector<std::string> vl = {"vlscore"};
  try {
    score_records(recs, &store, vl, 890.0);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("s2_img"), std::string::npos) << e.what();
  }
  const std::vector<std::string> unknown = {"bertscore"};
  EXPECT_THROW(score_records(recs, &store, unknown, 890.0), InputError);
  EXPECT_THROW(score_records(recs, nullptr, vl, 890.0), InputError);
  auto no_cand = recs;
  no_cand[0].candidate_text.reset();
  const std::vector<std::string> text = {"rouge_l"};
  EXPECT_THROW(score_records(no_cand, nullptr, text, 890.0), InputError);
}

std::vector<StudyRecord> random_suite(std::size_t n, EmbeddingStore& store, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<StudyRecord> recs;
  for (std::size_t k = 0; k < n; ++k) {
    const std::string id = "study" + std::to_string(k);
    const auto kind = kAllPerturbationKinds[k % 6];
    recs.push_back({id, id + "_img", "The left lung is clear.", "The right lung is clear.", kind, Split::test});
    for (const auto& eid : {id + "_img", candidate_embedding_id(id), reference_embedding_id(id)}) {
      std::vector<double> v(store.dim());
      for (auto& x : v) x = static_cast<float>(g(rng));
      store.add(eid, Vector(std::move(v)));
    }
  }
  return recs;
}

TEST_F(PipelineTest, OutputIsIndependentOfWorkerCount) {
  EmbeddingStore store(16, "m", 40.0);
  const auto recs = random_suite(60, store, 3);
  save_manifest(path("m.jsonl"), recs);
  save_embeddings(path("e.vlse"), store);

  std::string first;
  for (unsigned workers : {1u, 4u, 7u, 1u}) {
    RunConfig cfg;
    cfg.manifest_path = path("m.jsonl");
    cfg.embeddings_path = path("e.vlse");
    cfg.output_dir = path("out" + std::to_string(workers));
    cfg.metrics = {"vlscore", "cosine", "sphere_radius", "bleu4", "rouge_l", "meteor_lite"};
    cfg.workers = workers;
    std::ostringstream log;
    const auto run = cmd_score(cfg, log);
    ASSERT_TRUE(run.deltas.has_value());
    const std::string bytes = slurp(cfg.output_dir / "scores.csv") + slurp(cfg.output_dir / "summary.json") +
                              slurp(cfg.output_dir / "deltas.json");
    if (first.empty()) {
      first = bytes;
    } else {
      EXPECT_EQ(bytes, first) << "workers=" << workers;
    }
  }
  EXPECT_EQ(slurp(path("out1") / "scores.csv").substr(0, 22), "study_id,metric,value\n");
}

TEST_F(PipelineTest, ConstantOverrideWins) {
  EmbeddingStore store(2, "m", 890.0);
  add_triplet(store, "s1", {0, 0}, {3, 0}, {0, 4});
  save_manifest(path("m.jsonl"), std::vector<StudyRecord>{record("s1")});
  save_embeddings(path("e.vlse"), store);
  RunConfig cfg;
  cfg.manifest_path = path("m.jsonl");
  cfg.embeddings_path = path("e.vlse");
  cfg.output_dir = path("out");
  cfg.metrics = {"vlscore"};
  cfg.constant_C = 12.0;
  std::ostringstream log;
  const auto run = cmd_score(cfg, log);
  EXPECT_EQ(run.constant_C, 12.0);
  EXPECT_EQ(run.rows[0].value, 0.5);
}

TEST_F(PipelineTest, PerturbWritesSuiteAndUsesEnvFallback) {
  std::vector<StudyRecord> recs = {{"s1", "i1", "Left effusion. Mild edema.", {}, {}, {}}};
  save_manifest(path("m.jsonl"), recs);
  RunConfig cfg;
  cfg.manifest_path = path("m.jsonl");
  cfg.output_dir = path("out");
  cfg.seed = 5;

  ::unsetenv(perturb::kLexiconEnvVar);
  std::ostringstream log;
  EXPECT_THROW(cmd_perturb(cfg, log), InputError);

  ::setenv(perturb::kLexiconEnvVar, VLSCORE_LEXICON_FILE, 1);
  const auto run = cmd_perturb(cfg, log);
  ::unsetenv(perturb::kLexiconEnvVar);
  EXPECT_EQ(run.suite.records.size(), 3u);
  EXPECT_EQ(load_manifest(run.suite_path), run.suite.records);
  EXPECT_NE(log.str().find("SwapSeverity"), std::string::npos);
}

TEST_F(PipelineTest, CorrelateRanksMetricsAgainstRatings) {
  write_text("ratings.csv", "study_id,rating\na,1\nb,2\nc,3\nd,4\n");
  write_text("ext.csv",
             "study_id,metric,value\na,up,0.1\nb,up,0.2\nc,up,0.3\nd,up,0.4\n"
             "a,down,4\nb,down,3\nc,down,2\nd,down,1\n");
  RunConfig cfg;
  cfg.ratings_path = path("ratings.csv");
  cfg.external_scores_path = path("ext.csv");
  cfg.output_dir = path("out");
  std::ostringstream log;
  const auto table = cmd_correlate(cfg, log);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0].metric, "up");
  EXPECT_EQ(table.rows[0].tau, 1.0);
  EXPECT_EQ(table.rows[1].tau, -1.0);
  EXPECT_EQ(table.rows[0].n, 4u);

  const auto doc = nlohmann::json::parse(slurp(path("out") / "tau.json"));
  EXPECT_EQ(doc["variant"], "tau-b");
  EXPECT_EQ(doc["aggregation"], "mean");
}

TEST_F(PipelineTest, CorrelateReportsOrphans) {
  std::vector<ScoreRow> scores = {{"a", "m", 1}, {"b", "m", 2}, {"c", "m", 3}};
  std::map<std::string, double> ratings = {{"a", 1}, {"b", 2}, {"z", 3}};
  const std::vector<std::string> metrics = {"m"};
  try {
    correlate_scores(scores, metrics, ratings);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("c"), std::string::npos);
    EXPECT_NE(msg.find("z"), std::string::npos);
  }
}

TEST_F(PipelineTest, CorrelateMatchesPairEnumeration) {
  EmbeddingStore store(8, "m", 30.0);
  const auto recs = random_suite(120, store, 11);
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> err(0, 6);
  std::map<std::string, double> ratings;
  for (const auto& r : recs) ratings[r.study_id] = -err(rng);
  const std::vector<std::string> metrics = {"vlscore", "sphere_radius"};
  const auto run = score_records(recs, &store, metrics, 30.0);
  const auto table = correlate_scores(run.rows, metrics, ratings);

  for (const auto& metric : metrics) {
    std::vector<double> x, y;
    for (const auto& row : run.rows) {
      if (row.metric != metric) continue;
      x.push_back(metric_info(metric).higher_is_better ? row.value : -row.value);
      y.push_back(ratings.at(row.study_id));
    }
    const double expected = testing::brute_force_tau_b(x, y);
    const auto it = std::find_if(table.rows.begin(), table.rows.end(), [&](const TauRow& t) { return t.metric == metric; });
    ASSERT_NE(it, table.rows.end());
    EXPECT_EQ(it->tau, expected) << metric;
  }
}

// Image at the origin, reference on e1, candidates drifting along e2: every
// measure orders the candidates by their drift.
void write_concordant_fixture(const fs::path& manifest, const fs::path& embeddings, const fs::path& ratings,
                              std::size_t n) {
  EmbeddingStore store(4, "m", 890.0);
  std::vector<StudyRecord> recs;
  std::ofstream rating_out(ratings);
  rating_out << "study_id,errors\n";
  for (std::size_t k = 0; k < n; ++k) {
    const std::string id = "s" + std::to_string(k);
    const double t = 0.25 * static_cast<double>(k + 1);
    recs.push_back(record(id));
    store.add(id + "_img", Vector({0.0, 0.0, 0.0, 0.0}));
    store.add(reference_embedding_id(id), Vector({1.0, 0.0, 0.0, 0.0}));
    store.add(candidate_embedding_id(id), Vector({1.0, t, 0.0, 0.0}));
    rating_out << id << "," << k << "\n";
  }
  save_manifest(manifest, recs);
  save_embeddings(embeddings, store);
}

TEST_F(PipelineTest, AblateOnConcordantDataGivesTauOne) {
  write_concordant_fixture(path("m.jsonl"), path("e.vlse"), path("r.csv"), 25);
  RunConfig cfg;
  cfg.manifest_path = path("m.jsonl");
  cfg.embeddings_path = path("e.vlse");
  cfg.ratings_path = path("r.csv");
  cfg.output_dir = path("out");
  std::ostringstream log;
  const auto table = cmd_ablate(cfg, log);
  ASSERT_EQ(table.rows.size(), 4u);
  for (const auto& row : table.rows) EXPECT_EQ(row.tau, 1.0) << row.metric;
}

TEST_F(PipelineTest, AblateOnCoincidentTripletsIsATieError) {
  EmbeddingStore store(2, "m", 890.0);
  std::vector<StudyRecord> recs;
  for (int k = 0; k < 3; ++k) {
    const std::string id = "s" + std::to_string(k);
    recs.push_back(record(id));
    add_triplet(store, id, {1, 2}, {1, 2}, {1, 2});
  }
  save_manifest(path("m.jsonl"), recs);
  save_embeddings(path("e.vlse"), store);
  write_text("r.csv", "study_id,rating\ns0,1\ns1,2\ns2,3\n");
  RunConfig cfg;
  cfg.manifest_path = path("m.jsonl");
  cfg.embeddings_path = path("e.vlse");
  cfg.ratings_path = path("r.csv");
  cfg.output_dir = path("out");
  std::ostringstream log;
  try {
    cmd_ablate(cfg, log);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("metric \""), std::string::npos) << e.what();
  }
}

TEST_F(PipelineTest, CalibrateWritesLargestArea) {
  EmbeddingStore store(2, "m", 890.0);
  add_triplet(store, "a", {0, 0}, {1, 0}, {0, 2});
  add_triplet(store, "b", {0, 0}, {3, 0}, {0, 4});
  add_triplet(store, "c", {0, 0}, {1, 0}, {0, 5});
  save_manifest(path("m.jsonl"), std::vector<StudyRecord>{record("a"), record("b"), record("c")});
  save_embeddings(path("e.vlse"), store);
  RunConfig cfg;
  cfg.manifest_path = path("m.jsonl");
  cfg.embeddings_path = path("e.vlse");
  cfg.output_dir = path("out");
  std::ostringstream log;
  const auto run = cmd_calibrate(cfg, log);
  EXPECT_EQ(run.calibration.max_area, 6.0);
  ASSERT_TRUE(run.calibrated_store.has_value());
  const auto calibrated = load_embeddings(*run.calibrated_store);
  EXPECT_EQ(calibrated.constant_C(), 6.0);
  EXPECT_EQ(calibrated.ids(), store.ids());
  const auto doc = nlohmann::json::parse(slurp(path("out") / "calibration.json"));
  EXPECT_EQ(doc["argmax_study_id"], "b");
}

TEST_F(PipelineTest, ScatterJoinsTwoMetrics) {
  write_text("scores.csv", "study_id,metric,value\na,bleu4,0.1\na,vlscore,0.9\nb,bleu4,0.3\nb,vlscore,0.7\n");
  RunConfig cfg;
  cfg.scores_path = path("scores.csv");
  cfg.scatter_x = "bleu4";
  cfg.scatter_y = "vlscore";
  cfg.output_dir = path("out");
  std::ostringstream log;
  const auto s = cmd_scatter(cfg, log);
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_NEAR(s.mean_a, 0.2, 1e-15);
  EXPECT_NEAR(s.mean_b, 0.8, 1e-15);
  EXPECT_EQ(slurp(path("out") / "scatter.csv").substr(0, 9), "study_id,");
}

TEST(FormatTest, TableAndNumbers) {
  EXPECT_EQ(format_number(0.5), "0.5");
  const auto t = format_table({"metric", "tau"}, {{"vlscore", "0.7"}, {"bleu1", "-0.25"}});
  std::istringstream lines(t);
  std::string line;
  std::size_t width = 0;
  while (std::getline(lines, line)) {
    if (width == 0) width = line.size();
    EXPECT_EQ(line.size(), width) << line;
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + VLSCORE_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(PipelineTest, CliExitCodes) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("score --bogus"), 1);
  EXPECT_EQ(run_cli("score --manifest /nonexistent.jsonl --metrics bleu1 --output " + path("o").string()), 1);

  save_manifest(path("m.jsonl"), std::vector<StudyRecord>{record("s1")});
  EXPECT_EQ(run_cli("score --manifest " + path("m.jsonl").string() + " --metrics bleu1,rouge_l --output " +
                    path("o").string()),
            0);
  EXPECT_TRUE(fs::exists(path("o") / "scores.csv"));
  EXPECT_EQ(run_cli("score --manifest " + path("m.jsonl").string() + " --metrics nope --output " + path("o").string()),
            1);

  EmbeddingStore store(2, "m", 890.0);
  add_triplet(store, "s1", {1, 1}, {1, 1}, {1, 1});
  save_embeddings(path("e.vlse"), store);
  EXPECT_EQ(run_cli("calibrate --manifest " + path("m.jsonl").string() + " --embeddings " + path("e.vlse").string() +
                    " --output " + path("c").string()),
            1);
}

}  // namespace
}  // namespace vlscore::pipeline
