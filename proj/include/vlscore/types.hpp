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

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vlscore {

/// Dense embedding of an image or a report in the shared space.
///
/// Coordinates are held as doubles even when they were read from 32-bit
/// storage. A Vector is never empty and never holds NaN or Inf.
class Vector {
 public:
  explicit Vector(std::vector<double> values);
  Vector(std::initializer_list<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> values_;
};

enum class PerturbationKind {
  RemovePathologySentence,
  RemoveInsignificantSentence,
  SwapLocation,
  SwapSeverity,
  MaskNonInformative,
  NormalReportSubstitution,
};

inline constexpr std::array<PerturbationKind, 6> kAllPerturbationKinds = {
    PerturbationKind::RemovePathologySentence,
    PerturbationKind::RemoveInsignificantSentence,
    PerturbationKind::SwapLocation,
    PerturbationKind::SwapSeverity,
    PerturbationKind::MaskNonInformative,
    PerturbationKind::NormalReportSubstitution,
};

std::string_view to_string(PerturbationKind kind) noexcept;
std::optional<PerturbationKind> parse_perturbation_kind(std::string_view name) noexcept;

enum class Split { val, test, other };

std::string_view to_string(Split split) noexcept;
std::optional<Split> parse_split(std::string_view name) noexcept;

/// One study: an image, its reference report and optionally a candidate.
struct StudyRecord {
  std::string study_id;
  std::string image_id;
  std::string reference_text;
  std::optional<std::string> candidate_text;
  std::optional<PerturbationKind> perturbation;
  std::optional<Split> split;

  friend bool operator==(const StudyRecord&, const StudyRecord&) = default;
};

struct ScoreRow {
  std::string study_id;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const ScoreRow&, const ScoreRow&) = default;
};

// Embedding ids for the two reports of a study.
std::string reference_embedding_id(std::string_view study_id);
std::string candidate_embedding_id(std::string_view study_id);

}  // namespace vlscore
