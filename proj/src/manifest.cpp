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

#include "vlscore/manifest.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "vlscore/error.hpp"
#include "vlscore/text_util.hpp"

namespace vlscore {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string required_string(const json& obj, const char* key, const std::string& source,
                            std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(source, line, std::string("missing required field \"") + key + "\"");
  if (!it->is_string()) throw ParseError(source, line, std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, const std::string& source,
                                           std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(source, line, std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

StudyRecord parse_record(const std::string& text, const std::string& source, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, line, std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(source, line, "expected a JSON object");

  StudyRecord rec;
  rec.study_id = required_string(obj, "study_id", source, line);
  rec.image_id = required_string(obj, "image_id", source, line);
  rec.reference_text = required_string(obj, "reference_text", source, line);
  rec.candidate_text = optional_string(obj, "candidate_text", source, line);

  if (rec.study_id.empty()) throw ParseError(source, line, "study_id is empty");
  if (trim(rec.reference_text).empty()) throw ParseError(source, line, "reference_text is blank");

  if (auto kind = optional_string(obj, "perturbation", source, line)) {
    rec.perturbation = parse_perturbation_kind(*kind);
    if (!rec.perturbation) throw ParseError(source, line, "unknown perturbation kind \"" + *kind + "\"");
  }
  if (auto split = optional_string(obj, "split", source, line)) {
    rec.split = parse_split(*split).value_or(Split::other);
  }
  return rec;
}

}  // namespace

std::vector<StudyRecord> read_manifest(std::istream& in, const std::string& source) {
  std::vector<StudyRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto rec = parse_record(line, source, line_no);
    if (!seen.insert(rec.study_id).second) {
      throw ParseError(source, line_no, "duplicate study_id \"" + rec.study_id + "\"");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<StudyRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  return read_manifest(in, path.string());
}

void write_manifest(std::ostream& out, std::span<const StudyRecord> records) {
  for (const auto& rec : records) {
    ordered_json obj;
    obj["study_id"] = rec.study_id;
    obj["image_id"] = rec.image_id;
    obj["reference_text"] = rec.reference_text;
    if (rec.candidate_text) obj["candidate_text"] = *rec.candidate_text;
    if (rec.perturbation) obj["perturbation"] = std::string(to_string(*rec.perturbation));
    if (rec.split) obj["split"] = std::string(to_string(*rec.split));
    out << obj.dump() << '\n';
  }
}

void save_manifest(const std::filesystem::path& path, std::span<const StudyRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write manifest " + path.string());
  write_manifest(out, records);
}

}  // namespace vlscore
