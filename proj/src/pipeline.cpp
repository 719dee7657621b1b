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

#include "vlscore/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"
#include "vlscore/error.hpp"
#include "vlscore/manifest.hpp"
#include "vlscore/textmetrics.hpp"

namespace vlscore::pipeline {

namespace {

using nlohmann::ordered_json;

struct RecordScores {
  std::vector<ScoreRow> rows;
  std::vector<SkippedScore> skipped;
  std::size_t clamps = 0;
};

struct Triplet {
  const Vector* image = nullptr;
  const Vector* candidate = nullptr;
  const Vector* reference = nullptr;
};

RecordScores score_one(const StudyRecord& rec, const EmbeddingStore* store, std::span<const std::string> metrics,
                       double constant_C) {
  RecordScores out;
  const auto ref_tokens = text::tokenize(rec.reference_text);
  const auto cand_tokens = text::tokenize(*rec.candidate_text);

  Triplet t;
  auto triplet = [&]() -> const Triplet& {
    if (!t.image) {
      t.image = &store->at(rec.image_id);
      t.candidate = &store->at(candidate_embedding_id(rec.study_id));
      t.reference = &store->at(reference_embedding_id(rec.study_id));
    }
    return t;
  };

  for (const auto& metric : metrics) {
    double value = 0.0;
    try {
      if (metric == "vlscore") {
        const auto& p = triplet();
        bool clamped = false;
        value = geometry::vlscore_from_area(geometry::triangle_area(*p.image, *p.candidate, *p.reference),
                                            constant_C, &clamped);
        if (clamped) ++out.clamps;
      } else if (metric == "triangle_area") {
        const auto& p = triplet();
        value = geometry::triangle_area(*p.image, *p.candidate, *p.reference);
      } else if (metric == "cosine") {
        const auto& p = triplet();
        value = geometry::cosine_similarity(*p.reference, *p.candidate);
      } else if (metric == "image_cosine") {
        const auto& p = triplet();
        value = geometry::image_centered_cosine(*p.image, *p.candidate, *p.reference);
      } else if (metric == "sphere_radius") {
        const auto& p = triplet();
        value = geometry::min_enclosing_sphere_radius(*p.image, *p.candidate, *p.reference);
      } else if (metric.starts_with("bleu")) {
        value = text::bleu(ref_tokens, cand_tokens, metric.back() - '0').value;
      } else if (metric == "rouge_l") {
        value = text::rouge_l(ref_tokens, cand_tokens);
      } else if (metric == "meteor_lite") {
        value = text::meteor_lite(ref_tokens, cand_tokens);
      } else {
        throw InputError("unknown metric \"" + metric + "\"");
      }
    } catch (const UndefinedMeasureError& e) {
      out.skipped.push_back({rec.study_id, metric, e.what()});
      continue;
    }
    out.rows.push_back({rec.study_id, metric, value});
  }
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  if (dir.empty()) throw InputError("no output directory given");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

bool needs_store(std::span<const std::string> metrics) {
  return std::any_of(metrics.begin(), metrics.end(),
                     [](const std::string& m) { return metric_info(m).needs_embeddings; });
}

std::vector<std::string> present_metrics(std::span<const ScoreRow> rows) {
  std::set<std::string> names;
  for (const auto& r : rows) names.insert(r.metric);
  return {names.begin(), names.end()};
}

std::string aggregation_name(stats::Aggregation a) { return a == stats::Aggregation::mean ? "mean" : "sum"; }

void write_tau(const RunConfig& cfg, const TauTable& table, std::ostream& log) {
  ensure_dir(cfg.output_dir);
  ordered_json doc;
  doc["variant"] = "tau-b";
  doc["aggregation"] = aggregation_name(table.aggregation);
  doc["rows"] = ordered_json::array();
  std::vector<std::vector<std::string>> text_rows;
  for (const auto& r : table.rows) {
    ordered_json row;
    row["metric"] = r.metric;
    row["tau"] = r.tau;
    row["n"] = r.n;
    doc["rows"].push_back(std::move(row));
    text_rows.push_back({r.metric, fmt::format("{:.4f}", r.tau), std::to_string(r.n)});
  }
  open_output(cfg.output_dir / "tau.json") << doc.dump(2) << '\n';
  log << format_table({"metric", "kendall tau-b", "n"}, text_rows);
}

std::vector<StudyRecord> load_scorable(const RunConfig& cfg) {
  if (cfg.manifest_path.empty()) throw InputError("--manifest is required");
  auto records = load_manifest(cfg.manifest_path);
  for (const auto& r : records) {
    if (!r.candidate_text) throw InputError("record \"" + r.study_id + "\" has no candidate_text to score");
  }
  return records;
}

}  // namespace

const std::vector<MetricInfo>& metric_registry() {
  static const std::vector<MetricInfo> registry = {
      {"vlscore", true, true},     {"triangle_area", true, false}, {"cosine", true, true},
      {"image_cosine", true, true}, {"sphere_radius", true, false}, {"bleu1", false, true},
      {"bleu2", false, true},      {"bleu3", false, true},        {"bleu4", false, true},
      {"rouge_l", false, true},    {"meteor_lite", false, true},
  };
  return registry;
}

const MetricInfo& metric_info(const std::string& name) {
  for (const auto& m : metric_registry()) {
    if (m.name == name) return m;
  }
  throw InputError("unknown metric \"" + name + "\"");
}

const std::vector<std::string>& ablation_metrics() {
  static const std::vector<std::string> names = {"cosine", "image_cosine", "sphere_radius", "vlscore"};
  return names;
}

ScoreRun score_records(std::span<const StudyRecord> records, const EmbeddingStore* store,
                       std::span<const std::string> metrics, double constant_C, unsigned workers) {
  if (metrics.empty()) throw InputError("no metrics requested");
  for (const auto& m : metrics) metric_info(m);
  if (needs_store(metrics) && !store) throw InputError("embedding metrics requested but no embeddings given");
  if (!(constant_C > 0.0)) throw InputError("constant C must be positive");
  for (const auto& r : records) {
    if (!r.candidate_text) throw InputError("record \"" + r.study_id + "\" has no candidate_text to score");
  }

  std::vector<RecordScores> per_record(records.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto work = [&] {
    for (std::size_t k = next++; k < records.size(); k = next++) {
      try {
        per_record[k] = score_one(records[k], store, metrics, constant_C);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = records.size();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(records.size())));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  ScoreRun run;
  run.constant_C = constant_C;
  if (store) run.model_tag = store->model_tag();
  for (auto& rs : per_record) {
    run.rows.insert(run.rows.end(), rs.rows.begin(), rs.rows.end());
    run.skipped.insert(run.skipped.end(), rs.skipped.begin(), rs.skipped.end());
    run.clamp_count += rs.clamps;
  }
  std::sort(run.rows.begin(), run.rows.end(), [](const ScoreRow& a, const ScoreRow& b) {
    return std::tie(a.study_id, a.metric) < std::tie(b.study_id, b.metric);
  });

  for (const auto& m : metrics) {
    std::vector<double> values;
    for (const auto& r : run.rows) {
      if (r.metric == m) values.push_back(r.value);
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    run.summary[m] = {values.empty() ? 0.0 : sum / static_cast<double>(values.size()), values.size()};
  }

  std::map<std::string, PerturbationKind> kinds;
  for (const auto& r : records) {
    if (r.perturbation) kinds[r.study_id] = *r.perturbation;
  }
  if (!kinds.empty()) {
    std::set<PerturbationKind> present;
    for (const auto& [id, k] : kinds) present.insert(k);
    std::vector<stats::Contrast> contrasts;
    for (const auto& c : stats::default_contrasts()) {
      if (present.contains(c.minor) && present.contains(c.major)) contrasts.push_back(c);
    }
    run.deltas = stats::delta_table(run.rows, kinds, contrasts);
  }
  return run;
}

ScoreRun cmd_score(const RunConfig& cfg, std::ostream& log) {
  const auto records = load_scorable(cfg);
  std::optional<EmbeddingStore> store;
  if (needs_store(cfg.metrics)) {
    if (cfg.embeddings_path.empty()) throw InputError("--embeddings is required for embedding metrics");
    store = load_embeddings(cfg.embeddings_path);
  }
  const double c = cfg.constant_C.value_or(store ? store->constant_C() : geometry::kDefaultConstantC);
  auto run = score_records(records, store ? &*store : nullptr, cfg.metrics, c, cfg.workers);

  ensure_dir(cfg.output_dir);
  {
    auto out = open_output(cfg.output_dir / "scores.csv");
    write_scores_csv(out, run.rows);
  }

  ordered_json summary;
  summary["records"] = records.size();
  summary["rows"] = run.rows.size();
  summary["constant_C"] = run.constant_C;
  summary["model_tag"] = run.model_tag;
  summary["vlscore_clamped"] = run.clamp_count;
  summary["metrics"] = ordered_json::object();
  std::vector<std::vector<std::string>> text_rows;
  for (const auto& m : cfg.metrics) {
    const auto& s = run.summary.at(m);
    summary["metrics"][m] = {{"mean", s.mean}, {"count", s.count}};
    text_rows.push_back({m, fmt::format("{:.4f}", s.mean), std::to_string(s.count)});
  }
  summary["skipped"] = ordered_json::array();
  for (const auto& s : run.skipped) {
    summary["skipped"].push_back({{"study_id", s.study_id}, {"metric", s.metric}, {"reason", s.reason}});
  }
  open_output(cfg.output_dir / "summary.json") << summary.dump(2) << '\n';

  log << format_table({"metric", "mean", "n"}, text_rows);
  if (run.summary.contains("vlscore")) log << "vlscore clamped at 0: " << run.clamp_count << "\n";
  if (!run.skipped.empty()) log << "skipped scores: " << run.skipped.size() << "\n";

  if (run.deltas) {
    ordered_json doc;
    doc["means"] = ordered_json::array();
    for (const auto& [key, g] : run.deltas->rows) {
      doc["means"].push_back(
          {{"metric", key.first}, {"perturbation", std::string(to_string(key.second))}, {"mean", g.mean}, {"count", g.count}});
    }
    doc["deltas"] = ordered_json::array();
    std::vector<std::vector<std::string>> delta_rows;
    for (const auto& c : run.deltas->contrasts) {
      std::vector<std::string> line = {c.name};
      for (const auto& m : run.deltas->metrics) {
        const double d = run.deltas->delta(m, c.name);
        doc["deltas"].push_back({{"metric", m},
                                 {"contrast", c.name},
                                 {"minor", std::string(to_string(c.minor))},
                                 {"major", std::string(to_string(c.major))},
                                 {"delta", d}});
        line.push_back(fmt::format("{:.4f}", d));
      }
      delta_rows.push_back(std::move(line));
    }
    open_output(cfg.output_dir / "deltas.json") << doc.dump(2) << '\n';
    if (!delta_rows.empty()) {
      std::vector<std::string> header = {"delta (minor - major)"};
      header.insert(header.end(), run.deltas->metrics.begin(), run.deltas->metrics.end());
      log << format_table(header, delta_rows);
    }
  }
  return run;
}

PerturbRun cmd_perturb(const RunConfig& cfg, std::ostream& log) {
  std::filesystem::path lexicon_path = cfg.lexicon_path;
  if (lexicon_path.empty()) {
    if (const char* env = std::getenv(perturb::kLexiconEnvVar)) lexicon_path = env;
  }
  if (lexicon_path.empty()) {
    throw InputError(std::string("no lexicon: pass --lexicon or set ") + perturb::kLexiconEnvVar);
  }
  if (cfg.manifest_path.empty()) throw InputError("--manifest is required");
  const auto lex = perturb::load_lexicon(lexicon_path);
  const auto records = load_manifest(cfg.manifest_path);

  PerturbRun run;
  run.suite = perturb::generate_suite(records, lex, cfg.seed);
  ensure_dir(cfg.output_dir);
  run.suite_path = cfg.output_dir / "suite.jsonl";
  {
    auto out = open_output(run.suite_path);
    write_manifest(out, run.suite.records);
  }

  std::vector<std::vector<std::string>> rows;
  for (auto kind : kAllPerturbationKinds) {
    const auto& c = run.suite.count(kind);
    rows.push_back({std::string(to_string(kind)), std::to_string(c.applied), std::to_string(c.attempted)});
  }
  rows.push_back({"total", std::to_string(run.suite.records.size()), std::to_string(records.size() * 6)});
  log << format_table({"perturbation", "applied", "attempted"}, rows);
  return run;
}

TauTable correlate_scores(std::span<const ScoreRow> scores, std::span<const std::string> metrics,
                          const std::map<std::string, double>& ratings, std::span<const SkippedScore> skipped) {
  std::vector<std::string> names(metrics.begin(), metrics.end());
  if (names.empty()) names = present_metrics(scores);

  TauTable table;
  for (const auto& metric : names) {
    bool higher_is_better = true;
    for (const auto& m : metric_registry()) {
      if (m.name == metric) higher_is_better = m.higher_is_better;
    }
    for (const auto& s : skipped) {
      if (s.metric == metric) {
        throw InputError("metric \"" + metric + "\" is undefined for study \"" + s.study_id + "\": " + s.reason);
      }
    }
    std::map<std::string, double> by_study;
    for (const auto& r : scores) {
      if (r.metric == metric) by_study[r.study_id] = r.value;
    }
    std::vector<std::string> unrated;
    std::vector<std::string> unscored;
    for (const auto& [id, v] : by_study) {
      if (!ratings.contains(id)) unrated.push_back(id);
    }
    for (const auto& [id, v] : ratings) {
      if (!by_study.contains(id)) unscored.push_back(id);
    }
    if (!unrated.empty() || !unscored.empty()) {
      auto list = [](const std::vector<std::string>& ids) {
        std::string s;
        for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
        return "[" + s + "]";
      };
      throw InputError("metric \"" + metric + "\": ratings and scores cover different studies; scored without rating: " +
                       list(unrated) + "; rated without score: " + list(unscored));
    }
    std::vector<stats::RatingPair> pairs;
    for (const auto& [id, v] : by_study) pairs.push_back({id, higher_is_better ? v : -v, ratings.at(id)});
    try {
      table.rows.push_back({metric, stats::kendall_tau_b(pairs), pairs.size()});
    } catch (const InputError& e) {
      throw InputError("metric \"" + metric + "\": " + e.what());
    }
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const TauRow& a, const TauRow& b) {
    return a.tau > b.tau || (a.tau == b.tau && a.metric < b.metric);
  });
  return table;
}

TauTable cmd_correlate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.ratings_path.empty()) throw InputError("--ratings is required");
  const auto ratings = stats::load_ratings(cfg.ratings_path, cfg.aggregation);

  std::vector<ScoreRow> scores;
  std::vector<SkippedScore> skipped;
  std::vector<std::string> metrics = cfg.metrics;
  if (!cfg.metrics.empty()) {
    const auto records = load_scorable(cfg);
    std::optional<EmbeddingStore> store;
    if (needs_store(cfg.metrics)) {
      if (cfg.embeddings_path.empty()) throw InputError("--embeddings is required for embedding metrics");
      store = load_embeddings(cfg.embeddings_path);
    }
    const double c = cfg.constant_C.value_or(store ? store->constant_C() : geometry::kDefaultConstantC);
    auto run = score_records(records, store ? &*store : nullptr, cfg.metrics, c, cfg.workers);
    scores = std::move(run.rows);
    skipped = std::move(run.skipped);
  }
  if (!cfg.external_scores_path.empty()) {
    auto external = stats::import_external_scores(cfg.external_scores_path);
    for (const auto& m : present_metrics(external)) {
      if (std::find(metrics.begin(), metrics.end(), m) != metrics.end()) {
        throw InputError("external scores repeat computed metric \"" + m + "\"");
      }
      metrics.push_back(m);
    }
    scores.insert(scores.end(), external.begin(), external.end());
  }
  if (metrics.empty()) throw InputError("nothing to correlate: give --metrics or --external");

  auto table = correlate_scores(scores, metrics, ratings, skipped);
  table.aggregation = cfg.aggregation;
  write_tau(cfg, table, log);
  return table;
}

TauTable cmd_ablate(const RunConfig& cfg, std::ostream& log) {
  RunConfig ablate_cfg = cfg;
  ablate_cfg.metrics = ablation_metrics();
  ablate_cfg.external_scores_path.clear();
  return cmd_correlate(ablate_cfg, log);
}

CalibrateRun cmd_calibrate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.manifest_path.empty()) throw InputError("--manifest is required");
  if (cfg.embeddings_path.empty()) throw InputError("--embeddings is required");
  const auto records = load_manifest(cfg.manifest_path);
  auto store = load_embeddings(cfg.embeddings_path);

  std::vector<geometry::EmbeddingTriplet> triplets;
  for (const auto& r : records) {
    triplets.push_back({r.image_id, candidate_embedding_id(r.study_id), reference_embedding_id(r.study_id)});
  }
  CalibrateRun run;
  run.calibration = geometry::calibrate_constant(store, triplets);
  const auto& cal = run.calibration;

  ensure_dir(cfg.output_dir);
  ordered_json doc;
  doc["triplets"] = triplets.size();
  doc["max_area"] = cal.max_area;
  doc["argmax_study_id"] = records[cal.argmax].study_id;
  doc["previous_constant_C"] = store.constant_C();
  doc["warnings"] = cal.warnings;

  log << "largest triangle area: " << format_number(cal.max_area) << " (study " << records[cal.argmax].study_id
      << ")\n";
  for (const auto& w : cal.warnings) log << "warning: " << w << "\n";
  if (cal.max_area > 0.0) {
    store.set_constant_C(cal.max_area);
    run.calibrated_store = cfg.output_dir / "calibrated.vlse";
    save_embeddings(*run.calibrated_store, store);
    doc["recommended_constant_C"] = cal.max_area;
    log << "recommended C: " << format_number(cal.max_area) << ", written to " << run.calibrated_store->string()
        << "\n";
  }
  open_output(cfg.output_dir / "calibration.json") << doc.dump(2) << '\n';
  return run;
}

stats::Scatter cmd_scatter(const RunConfig& cfg, std::ostream& log) {
  if (cfg.scores_path.empty()) throw InputError("--scores is required");
  if (cfg.scatter_x.empty() || cfg.scatter_y.empty()) throw InputError("--x and --y metrics are required");
  const auto rows = stats::import_external_scores(cfg.scores_path);
  std::vector<ScoreRow> a;
  std::vector<ScoreRow> b;
  for (const auto& r : rows) {
    if (r.metric == cfg.scatter_x) a.push_back(r);
    if (r.metric == cfg.scatter_y) b.push_back(r);
  }
  if (a.empty()) throw InputError("no scores for metric \"" + cfg.scatter_x + "\"");
  if (b.empty()) throw InputError("no scores for metric \"" + cfg.scatter_y + "\"");
  auto scatter = stats::scatter_export(a, b);

  ensure_dir(cfg.output_dir);
  auto out = open_output(cfg.output_dir / "scatter.csv");
  out << "study_id," << cfg.scatter_x << "," << cfg.scatter_y << "\n";
  for (const auto& p : scatter.points) out << p.study_id << "," << format_number(p.a) << "," << format_number(p.b) << "\n";
  log << format_table({"metric", "mean"}, {{cfg.scatter_x, fmt::format("{:.4f}", scatter.mean_a)},
                                           {cfg.scatter_y, fmt::format("{:.4f}", scatter.mean_b)}});
  return scatter;
}

std::string format_number(double v) { return fmt::format("{}", v); }

void write_scores_csv(std::ostream& out, std::span<const ScoreRow> rows) {
  out << "study_id,metric,value\n";
  for (const auto& r : rows) {
    const bool quote = r.study_id.find_first_of(",\"") != std::string::npos;
    if (quote) {
      std::string escaped;
      for (char c : r.study_id) {
        if (c == '"') escaped += '"';
        escaped += c;
      }
      out << '"' << escaped << '"';
    } else {
      out << r.study_id;
    }
    out << ',' << r.metric << ',' << format_number(r.value) << '\n';
  }
}

std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto widen = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size() && k < width.size(); ++k) width[k] = std::max(width[k], cells[k].size());
  };
  widen(header);
  for (const auto& r : rows) widen(r);

  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t k = 0; k < width.size(); ++k) {
      const std::string cell = k < cells.size() ? cells[k] : "";
      if (k) s += "  ";
      // First column left-aligned, numbers right-aligned.
      s += k == 0 ? fmt::format("{:<{}}", cell, width[k]) : fmt::format("{:>{}}", cell, width[k]);
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

}  // namespace vlscore::pipeline
