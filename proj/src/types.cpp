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

#include "vlscore/types.hpp"

#include <cmath>

#include "vlscore/error.hpp"

namespace vlscore {

Vector::Vector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InputError("vector must have dim >= 1");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InputError("vector coordinate " + std::to_string(i) + " is not finite");
    }
  }
}

Vector::Vector(std::initializer_list<double> values) : Vector(std::vector<double>(values)) {}

std::string_view to_string(PerturbationKind kind) noexcept {
  switch (kind) {
    case PerturbationKind::RemovePathologySentence:
      return "RemovePathologySentence";
    case PerturbationKind::RemoveInsignificantSentence:
      return "RemoveInsignificantSentence";
    case PerturbationKind::SwapLocation:
      return "SwapLocation";
    case PerturbationKind::SwapSeverity:
      return "SwapSeverity";
    case PerturbationKind::MaskNonInformative:
      return "MaskNonInformative";
    case PerturbationKind::NormalReportSubstitution:
      return "NormalReportSubstitution";
  }
  return "";
}

std::optional<PerturbationKind> parse_perturbation_kind(std::string_view name) noexcept {
  for (auto kind : kAllPerturbationKinds) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::val:
      return "val";
    case Split::test:
      return "test";
    case Split::other:
      return "other";
  }
  return "";
}

std::optional<Split> parse_split(std::string_view name) noexcept {
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  if (name == "other") return Split::other;
  return std::nullopt;
}

std::string reference_embedding_id(std::string_view study_id) {
  return std::string(study_id) + "#ref";
}

std::string candidate_embedding_id(std::string_view study_id) {
  return std::string(study_id) + "#cand";
}

}  // namespace vlscore
