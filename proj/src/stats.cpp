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

#include "vlscore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <unordered_set>

#include "vlscore/error.hpp"
#include "vlscore/text_util.hpp"

namespace vlscore::stats {

namespace {

long long tie_pairs(long long t) { return t * (t - 1) / 2; }

// Stable merge sort of `v` that returns the number of strict inversions.
long long sort_counting_inversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                                   std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long swaps = sort_counting_inversions(v, buf, lo, mid) + sort_counting_inversions(v, buf, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<long long>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

double mean_of(std::vector<double> values) {
  // Sorted summation keeps the mean independent of input order.
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

void require_header(const std::string& line, const std::vector<std::string>& expected, const std::string& source) {
  auto fields = split_csv_line(line);
  for (auto& f : fields) f = std::string(trim(f));
  if (fields != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw ParseError(source, 1, "expected header \"" + want + "\"");
  }
}

double parse_finite(const std::string& text, const std::string& source, std::size_t line) {
  const std::string t(trim(text));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ParseError(source, line, "value \"" + t + "\" is not a number");
  }
  if (used != t.size()) throw ParseError(source, line, "value \"" + t + "\" is not a number");
  if (!std::isfinite(v)) throw ParseError(source, line, "value \"" + t + "\" is not finite");
  return v;
}

}  // namespace

double tau_b_from_counts(const KendallCounts& c) {
  return static_cast<double>(c.concordant_minus_discordant) /
         std::sqrt(static_cast<double>(c.pairs - c.ties_x) * static_cast<double>(c.pairs - c.ties_y));
}

KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  KendallCounts c;
  c.n = static_cast<long long>(n);
  c.pairs = tie_pairs(c.n);

  long long joint_ties = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    c.ties_x += tie_pairs(static_cast<long long>(j - i));
    for (std::size_t k = i; k < j;) {
      std::size_t m = k;
      while (m < j && y[order[m]] == y[order[k]]) ++m;
      joint_ties += tie_pairs(static_cast<long long>(m - k));
      k = m;
    }
    i = j;
  }

  std::vector<double> ys(n);
  for (std::size_t k = 0; k < n; ++k) ys[k] = y[order[k]];
  std::vector<double> buf(n);
  const long long discordant = sort_counting_inversions(ys, buf, 0, n);

  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && ys[j] == ys[i]) ++j;
    c.ties_y += tie_pairs(static_cast<long long>(j - i));
    i = j;
  }

  c.concordant_minus_discordant = c.pairs - c.ties_x - c.ties_y + joint_ties - 2 * discordant;
  return c;
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("kendall_tau_b: sequences differ in length");
  if (x.size() < 2) throw InputError("kendall_tau_b: need at least 2 pairs, got " + std::to_string(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !std::isfinite(y[k])) throw InputError("kendall_tau_b: non-finite value");
  }
  const auto c = kendall_counts(x, y);
  if (c.pairs == c.ties_x) throw InputError("kendall_tau_b: all metric values are tied, tau-b is undefined");
  if (c.pairs == c.ties_y) throw InputError("kendall_tau_b: all human ratings are tied, tau-b is undefined");
  return tau_b_from_counts(c);
}

double kendall_tau_b(std::span<const RatingPair> pairs) {
  std::unordered_set<std::string> seen;
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(pairs.size());
  y.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!seen.insert(p.study_id).second) {
      throw InputError("kendall_tau_b: duplicate study_id \"" + p.study_id + "\"");
    }
    x.push_back(p.metric_value);
    y.push_back(p.human_rating);
  }
  return kendall_tau_b(x, y);
}

std::vector<Contrast> default_contrasts() {
  return {
      {"sentence_removal", PerturbationKind::RemoveInsignificantSentence, PerturbationKind::RemovePathologySentence},
      {"location", PerturbationKind::MaskNonInformative, PerturbationKind::SwapLocation},
      {"severity", PerturbationKind::MaskNonInformative, PerturbationKind::SwapSeverity},
  };
}

double DeltaTable::delta(const std::string& metric, const std::string& contrast) const {
  auto it = deltas.find({metric, contrast});
  if (it == deltas.end()) throw InputError("no delta for metric \"" + metric + "\", contrast \"" + contrast + "\"");
  return it->second;
}

double DeltaTable::mean(const std::string& metric, PerturbationKind kind) const {
  auto it = rows.find({metric, kind});
  if (it == rows.end()) {
    throw InputError("no rows for metric \"" + metric + "\", kind " + std::string(to_string(kind)));
  }
  return it->second.mean;
}

DeltaTable delta_table(std::span<const ScoreRow> scores, const std::map<std::string, PerturbationKind>& kinds,
                       std::span<const Contrast> contrasts) {
  std::map<std::pair<std::string, PerturbationKind>, std::vector<double>> groups;
  std::set<std::string> metrics;
  for (const auto& row : scores) {
    auto it = kinds.find(row.study_id);
    if (it == kinds.end()) continue;
    groups[{row.metric, it->second}].push_back(row.value);
    metrics.insert(row.metric);
  }

  DeltaTable table;
  table.metrics.assign(metrics.begin(), metrics.end());
  table.contrasts.assign(contrasts.begin(), contrasts.end());
  for (auto& [key, values] : groups) table.rows[key] = {mean_of(values), values.size()};

  for (const auto& metric : table.metrics) {
    for (const auto& c : contrasts) {
      for (auto kind : {c.minor, c.major}) {
        if (!table.rows.contains({metric, kind})) {
          throw InputError("delta_table: contrast \"" + c.name + "\" needs " + std::string(to_string(kind)) +
                           " rows for metric \"" + metric + "\", found none");
        }
      }
      table.deltas[{metric, c.name}] = table.rows[{metric, c.minor}].mean - table.rows[{metric, c.major}].mean;
    }
  }
  return table;
}

Scatter scatter_export(std::span<const ScoreRow> scores_a, std::span<const ScoreRow> scores_b) {
  auto index = [](std::span<const ScoreRow> rows, const char* side) {
    std::map<std::string, double> m;
    for (const auto& r : rows) {
      if (!m.emplace(r.study_id, r.value).second) {
        throw InputError(std::string("scatter_export: duplicate study_id \"") + r.study_id + "\" on side " + side);
      }
    }
    return m;
  };
  const auto a = index(scores_a, "a");
  const auto b = index(scores_b, "b");

  std::vector<std::string> only_a;
  std::vector<std::string> only_b;
  for (const auto& [id, v] : a) {
    if (!b.contains(id)) only_a.push_back(id);
  }
  for (const auto& [id, v] : b) {
    if (!a.contains(id)) only_b.push_back(id);
  }
  if (!only_a.empty() || !only_b.empty()) {
    auto list = [](const std::vector<std::string>& ids) {
      std::string s;
      for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
      return "[" + s + "]";
    };
    throw InputError("scatter_export: study ids differ; only in a: " + list(only_a) + "; only in b: " + list(only_b));
  }

  Scatter s;
  std::vector<double> va;
  std::vector<double> vb;
  for (const auto& [id, v] : a) {
    s.points.push_back({id, v, b.at(id)});
    va.push_back(v);
    vb.push_back(b.at(id));
  }
  if (!s.points.empty()) {
    s.mean_a = mean_of(std::move(va));
    s.mean_b = mean_of(std::move(vb));
  }
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<ScoreRow> read_scores_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file, expected header");
  require_header(line, {"study_id", "metric", "value"}, source);

  std::vector<ScoreRow> rows;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 3) throw ParseError(source, line_no, "expected 3 fields, got " + std::to_string(f.size()));
    ScoreRow row{std::string(trim(f[0])), std::string(trim(f[1])), parse_finite(f[2], source, line_no)};
    if (row.study_id.empty() || row.metric.empty()) throw ParseError(source, line_no, "empty study_id or metric");
    if (!seen.insert({row.study_id, row.metric}).second) {
      throw ParseError(source, line_no,
                       "duplicate (study_id, metric) = (" + row.study_id + ", " + row.metric + ")");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScoreRow> import_external_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scores " + path.string());
  return read_scores_csv(in, path.string());
}

std::map<std::string, double> read_ratings_csv(std::istream& in, Aggregation agg, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file, expected header");
  auto header = split_csv_line(line);
  for (auto& h : header) h = std::string(trim(h));
  bool errors = false;
  if (header == std::vector<std::string>{"study_id", "errors"}) {
    errors = true;
  } else if (header != std::vector<std::string>{"study_id", "rating"}) {
    throw ParseError(source, 1, "expected header \"study_id,rating\" or \"study_id,errors\"");
  }

  std::map<std::string, std::vector<double>> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 2) throw ParseError(source, line_no, "expected 2 fields, got " + std::to_string(f.size()));
    std::string id(trim(f[0]));
    if (id.empty()) throw ParseError(source, line_no, "empty study_id");
    const double v = parse_finite(f[1], source, line_no);
    values[id].push_back(errors ? -v : v);
  }

  std::map<std::string, double> out;
  for (auto& [id, vs] : values) {
    if (agg == Aggregation::mean) {
      out[id] = mean_of(vs);
    } else {
      std::sort(vs.begin(), vs.end());
      double sum = 0.0;
      for (double v : vs) sum += v;
      out[id] = sum;
    }
  }
  return out;
}

std::map<std::string, double> load_ratings(const std::filesystem::path& path, Aggregation agg) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open ratings " + path.string());
  return read_ratings_csv(in, agg, path.string());
}

}  // namespace vlscore::stats
