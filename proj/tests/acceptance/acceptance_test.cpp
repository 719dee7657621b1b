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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/core.h>

#include "../edit_check.hpp"
#include "../oracles.hpp"
#include "vlscore/geometry.hpp"
#include "vlscore/manifest.hpp"
#include "vlscore/perturb.hpp"
#include "vlscore/pipeline.hpp"
#include "vlscore/stats.hpp"
#include "vlscore/synth.hpp"
#include "vlscore/text_util.hpp"
#include "vlscore/textmetrics.hpp"

namespace {

using namespace vlscore;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Result {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double relative_error(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

Vector random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n;
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return Vector(std::move(v));
}

Result triangle_area_oracle() {
  Result res;
  const auto start = Clock::now();
  std::mt19937_64 rng(20240101);
  double worst = 0.0;
  std::size_t count = 0;
  for (std::size_t dim : {2, 8, 512}) {
    for (int t = 0; t < 1000; ++t, ++count) {
      const std::array<Vector, 3> p = {random_vector(rng, dim), random_vector(rng, dim), random_vector(rng, dim)};
      const double want = testing::heron_area(testing::distance(p[0].values(), p[1].values()),
                                              testing::distance(p[1].values(), p[2].values()),
                                              testing::distance(p[0].values(), p[2].values()));
      std::array<int, 3> order = {0, 1, 2};
      do {
        const double got = geometry::triangle_area(p[order[0]], p[order[1]], p[order[2]]);
        const double err = relative_error(got, want);
        worst = std::max(worst, err);
        if (!(err <= 1e-9)) res.fail(fmt::format("dim {} trial {}: area {} vs Heron {}", dim, t, got, want));
      } while (std::next_permutation(order.begin(), order.end()));
    }
  }
  const double secs = seconds_since(start);
  if (secs >= 5.0) res.fail(fmt::format("took {:.2f} s", secs));
  if (res.pass) res.detail = fmt::format("{} triplets x 6 orders, worst rel err {:.2e}, {:.2f} s", count, worst, secs);
  return res;
}

Result vlscore_identities() {
  Result res;
  const Vector i({0.3, -1.2, 4.0});
  if (geometry::vlscore(i, i, i) != 1.0) res.fail("vlscore(i,i,i) != 1");

  SynthSpec spec;
  spec.triplets.push_back({"img", "cand", "ref", PlantedSides{3.0, 4.0, 5.0}});
  const auto store = synth_embeddings(spec, 7);
  const double s = geometry::vlscore(store.at("img"), store.at("cand"), store.at("ref"), {890.0});
  if (!(std::abs(s - 0.9932584) <= 1e-7)) res.fail(fmt::format("planted (3,4,5): {}", s));

  // (0,0), (3,0), (0,4) has area exactly 6.
  const Vector a({0.0, 0.0}), b({3.0, 0.0}), c({0.0, 4.0});
  if (geometry::vlscore(a, b, c, {6.0}) != 0.0) res.fail("area == C not clamped to 0");
  if (geometry::vlscore(a, b, c, {2.5}) != 0.0) res.fail("area > C not clamped to 0");
  if (res.pass) res.detail = fmt::format("planted (3,4,5) -> {:.9f}", s);
  return res;
}

Result enclosing_sphere_oracle() {
  Result res;
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const testing::Lift lift(512, rng);
    std::array<std::array<double, 2>, 3> q;
    for (auto& pt : q) pt = {coord(rng), coord(rng)};
    const auto want = testing::planar_enclosing_circle(q[0], q[1], q[2]);
    std::array<Vector, 3> p = {Vector(lift(q[0][0], q[0][1])), Vector(lift(q[1][0], q[1][1])),
                               Vector(lift(q[2][0], q[2][1]))};
    const auto sphere = geometry::min_enclosing_sphere(p[0], p[1], p[2]);
    const double err = relative_error(sphere.radius, want.r);
    worst = std::max(worst, err);
    if (!(err <= 1e-9)) res.fail(fmt::format("trial {}: radius {} vs {}", t, sphere.radius, want.r));
    for (const auto& v : p) {
      const double d = testing::distance(sphere.center, v.values());
      if (!(d <= sphere.radius + 1e-9)) res.fail(fmt::format("trial {}: vertex at {} outside {}", t, d, sphere.radius));
    }
  }
  const double right = geometry::min_enclosing_sphere_radius(Vector({0.0, 0.0}), Vector({4.0, 0.0}), Vector({0.0, 3.0}));
  if (right != 2.5) res.fail(fmt::format("right triangle radius {}", right));
  if (res.pass) res.detail = fmt::format("10000 lifted triangles, worst rel err {:.2e}, right triangle 2.5", worst);
  return res;
}

Result kendall_oracle() {
  Result res;
  const auto start = Clock::now();
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<std::size_t> size(2, 500);
  std::uniform_int_distribution<int> levels(1, 15);
  int datasets = 0;
  while (datasets < 200) {
    const std::size_t n = size(rng);
    std::uniform_int_distribution<int> vx(0, levels(rng));
    std::uniform_int_distribution<int> vy(0, levels(rng));
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = vx(rng) * 0.5;
      y[k] = -vy(rng);
    }
    const bool flat = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
                      std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (flat) continue;
    ++datasets;
    const double got = stats::kendall_tau_b(x, y);
    const double want = testing::brute_force_tau_b(x, y);
    if (got != want) res.fail(fmt::format("dataset {} (n={}): {} vs {}", datasets, n, got, want));
  }
  const std::vector<double> up = {1, 2, 3, 4, 5};
  const std::vector<double> same = {2, 4, 6, 8, 10};
  const std::vector<double> down = {5, 4, 3, 2, 1};
  if (stats::kendall_tau_b(up, same) != 1.0) res.fail("concordant != 1");
  if (stats::kendall_tau_b(up, down) != -1.0) res.fail("reversed != -1");
  const double secs = seconds_since(start);
  if (secs >= 10.0) res.fail(fmt::format("took {:.2f} s", secs));
  if (res.pass) res.detail = fmt::format("200 tied datasets exact, {:.2f} s", secs);
  return res;
}

Result nlg_fixtures() {
  Result res;
  using text::tokenize;
  auto check = [&](const char* what, double got, double want) {
    if (!(std::abs(got - want) <= 1e-5)) res.fail(fmt::format("{}: {} vs {}", what, got, want));
  };
  const auto ref3 = tokenize("no pleural effusion");
  check("bleu1 hand case", text::bleu(ref3, tokenize("no effusion"), 1).value, 0.60653);
  check("rouge_l fixture", text::rouge_l(tokenize("a b c d"), tokenize("a c d")), 0.85714);
  check("meteor_lite permuted", text::meteor_lite(tokenize("the cat sat"), tokenize("cat sat the")), 0.85185);
  const auto same = tokenize("the heart size is normal .");
  if (text::bleu(same, same, 4).value != 1.0) res.fail("identical bleu4 != 1");
  if (text::rouge_l(same, same) != 1.0) res.fail("identical rouge_l != 1");
  if (text::meteor_lite(same, same) != 1.0) res.fail("identical meteor_lite != 1");
  if (res.pass) res.detail = "bleu1 0.60653, rouge_l 0.85714, meteor_lite 0.85185, identical 1.0";
  return res;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() / fmt::format("vlscore_acceptance_{}", ::getpid());
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
};

const fs::path kCorpus = fs::path(VLSCORE_TEST_DATA_DIR) / "reports.jsonl";

Result perturbation_discipline(const Workspace& ws) {
  Result res;
  const auto records = load_manifest(kCorpus);
  if (records.size() != 50) res.fail(fmt::format("corpus has {} reports", records.size()));
  const auto lex = perturb::load_lexicon(VLSCORE_LEXICON_FILE);

  for (const auto& r : records) {
    const auto sentences = perturb::split_sentences(r.reference_text);
    if (perturb::join_sentences(sentences) != r.reference_text) res.fail("split not lossless for " + r.study_id);
  }

  std::string files[2];
  for (int k = 0; k < 2; ++k) {
    pipeline::RunConfig cfg;
    cfg.manifest_path = kCorpus;
    cfg.lexicon_path = VLSCORE_LEXICON_FILE;
    cfg.output_dir = ws.root / fmt::format("perturb{}", k);
    cfg.seed = 99;
    std::ostringstream log;
    files[k] = read_file(pipeline::cmd_perturb(cfg, log).suite_path);
  }
  if (files[0] != files[1] || files[0].empty()) res.fail("suite manifests differ between runs");

  std::size_t applied = 0;
  for (std::uint64_t seed : {0ull, 99ull, 12345ull}) {
    for (const auto& r : records) {
      const std::uint64_t record_seed = seed ^ stable_hash(r.study_id);
      for (std::size_t k = 0; k < kAllPerturbationKinds.size(); ++k) {
        const auto o = perturb::apply_perturbation(kAllPerturbationKinds[k], r.reference_text, lex,
                                                   mix_seed(record_seed, k));
        applied += o.applied;
        const auto why = testing::check_single_edit(o);
        if (!why.empty()) res.fail(fmt::format("{} {}: {}", r.study_id, to_string(o.kind), why));
      }
    }
  }
  if (res.pass) {
    res.detail = fmt::format("50 reports split losslessly, identical suites ({} bytes), {} edits checked",
                             files[0].size(), applied);
  }
  return res;
}

bool is_major(PerturbationKind k) {
  return k == PerturbationKind::RemovePathologySentence || k == PerturbationKind::SwapLocation ||
         k == PerturbationKind::SwapSeverity;
}

Result end_to_end(const Workspace& ws) {
  Result res;
  const auto start = Clock::now();
  std::ostringstream log;

  pipeline::RunConfig pcfg;
  pcfg.manifest_path = kCorpus;
  pcfg.lexicon_path = VLSCORE_LEXICON_FILE;
  pcfg.output_dir = ws.root / "e2e";
  pcfg.seed = 2025;
  const auto suite = pipeline::cmd_perturb(pcfg, log);

  // Each suite record gets its own image so the planted triangles are independent.
  auto records = load_manifest(suite.suite_path);
  SynthSpec spec;
  spec.model_tag = "planted";
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> minor_area(20.0, 60.0);
  std::uniform_real_distribution<double> major_area(100.0, 200.0);
  for (auto& r : records) {
    r.image_id = r.study_id + "#img";
    const double area = is_major(*r.perturbation) ? major_area(rng) : minor_area(rng);
    spec.triplets.push_back(
        {r.image_id, candidate_embedding_id(r.study_id), reference_embedding_id(r.study_id), PlantedArea{area}});
  }
  save_manifest(pcfg.output_dir / "planted.jsonl", records);
  save_embeddings(pcfg.output_dir / "planted.vlse", synth_embeddings(spec, 5));

  pipeline::RunConfig scfg;
  scfg.manifest_path = pcfg.output_dir / "planted.jsonl";
  scfg.embeddings_path = pcfg.output_dir / "planted.vlse";
  scfg.output_dir = pcfg.output_dir / "scores";
  scfg.metrics = {"vlscore", "triangle_area", "bleu4", "rouge_l", "meteor_lite"};
  scfg.workers = 4;
  const auto run = pipeline::cmd_score(scfg, log);
  std::vector<std::string> deltas;
  if (!run.deltas || run.deltas->contrasts.size() != 3) {
    res.fail("score run did not produce all three contrasts");
  } else {
    for (const auto& c : run.deltas->contrasts) {
      const double d = run.deltas->delta("vlscore", c.name);
      deltas.push_back(fmt::format("{} {:.4f}", c.name, d));
      if (!(d > 0.0)) res.fail(fmt::format("vlscore delta for {} is {}", c.name, d));
    }
  }

  // Concordant data: image at the origin, reference on e1, candidates
  // drifting along e2; ratings penalize the drift.
  EmbeddingStore store(8, "concordant", 890.0);
  std::vector<StudyRecord> concordant;
  std::ofstream ratings(pcfg.output_dir / "ratings.csv");
  ratings << "study_id,errors\n";
  for (int k = 0; k < 40; ++k) {
    const std::string id = fmt::format("c{:02d}", k);
    const double t = 0.125 * (k + 1);
    concordant.push_back({id, id + "#img", "No effusion.", std::string("No effusion."), std::nullopt, std::nullopt});
    store.add(id + "#img", Vector(std::vector<double>(8, 0.0)));
    store.add(reference_embedding_id(id), Vector({1.0, 0, 0, 0, 0, 0, 0, 0}));
    store.add(candidate_embedding_id(id), Vector({1.0, t, 0, 0, 0, 0, 0, 0}));
    ratings << id << "," << k << "\n";
  }
  ratings.close();
  save_manifest(pcfg.output_dir / "concordant.jsonl", concordant);
  save_embeddings(pcfg.output_dir / "concordant.vlse", store);

  pipeline::RunConfig acfg;
  acfg.manifest_path = pcfg.output_dir / "concordant.jsonl";
  acfg.embeddings_path = pcfg.output_dir / "concordant.vlse";
  acfg.ratings_path = pcfg.output_dir / "ratings.csv";
  acfg.output_dir = pcfg.output_dir / "ablate";
  const auto table = pipeline::cmd_ablate(acfg, log);
  if (table.rows.size() != 4) res.fail(fmt::format("ablate gave {} rows", table.rows.size()));
  for (const auto& row : table.rows) {
    if (row.tau != 1.0) res.fail(fmt::format("ablate tau for {} is {}", row.metric, row.tau));
  }

  const double secs = seconds_since(start);
  if (secs >= 30.0) res.fail(fmt::format("took {:.2f} s", secs));
  if (res.pass) {
    std::string joined;
    for (const auto& d : deltas) joined += (joined.empty() ? "" : ", ") + d;
    res.detail = fmt::format("{} suite records; {}; ablate tau 1.0 x4; {:.2f} s", records.size(), joined, secs);
  }
  return res;
}

Result calibration_maximum() {
  Result res;
  // Integer coordinates make the planted areas 1, 6 and 2.5 exact.
  EmbeddingStore store(2, "planted", 890.0);
  auto plant = [&](const std::string& id, double gx, double ry) {
    store.add(id + "#img", Vector({0.0, 0.0}));
    store.add(candidate_embedding_id(id), Vector({gx, 0.0}));
    store.add(reference_embedding_id(id), Vector({0.0, ry}));
  };
  plant("a", 1.0, 2.0);
  plant("b", 3.0, 4.0);
  plant("c", 1.0, 5.0);
  std::vector<geometry::EmbeddingTriplet> triplets;
  for (const char* id : {"a", "b", "c"}) {
    triplets.push_back({std::string(id) + "#img", candidate_embedding_id(id), reference_embedding_id(id)});
  }
  const auto cal = geometry::calibrate_constant(store, triplets);
  if (cal.max_area != 6.0) res.fail(fmt::format("max area {}", cal.max_area));
  if (cal.argmax != 1) res.fail(fmt::format("argmax {}", cal.argmax));
  if (res.pass) res.detail = "areas {1, 6, 2.5} -> 6";
  return res;
}

}  // namespace

int main() {
  Workspace ws;
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"triangle area matches Heron", triangle_area_oracle},
      {"vlscore identities", vlscore_identities},
      {"enclosing sphere matches planar case analysis", enclosing_sphere_oracle},
      {"kendall tau-b matches pair enumeration", kendall_oracle},
      {"nlg fixtures", nlg_fixtures},
      {"perturbation determinism and edit discipline", [&] { return perturbation_discipline(ws); }},
      {"end-to-end deltas and ablation", [&] { return end_to_end(ws); }},
      {"calibration picks the largest area", calibration_maximum},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
    }
    failures += !r.pass;
    fmt::print("{} {}: {}\n", r.pass ? "PASS" : "FAIL", name, r.detail);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
