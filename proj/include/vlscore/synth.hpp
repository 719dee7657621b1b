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
#include <string>
#include <variant>
#include <vector>

#include "vlscore/embeddings.hpp"

namespace vlscore {

// Side lengths of a planted triangle, named by the vertex pair they join.
struct PlantedSides {
  double image_candidate = 0.0;
  double image_reference = 0.0;
  double candidate_reference = 0.0;
};

// A right isosceles triangle with the right angle at the image vertex.
struct PlantedArea {
  double area = 0.0;
};

struct PlantedTriplet {
  std::string image_id;
  std::string candidate_id;
  std::string reference_id;
  std::variant<PlantedSides, PlantedArea> shape;
};

struct SynthSpec {
  std::uint32_t dim = 512;
  std::string model_tag = "synthetic";
  double constant_C = 890.0;
  // Standard deviation of the random per-triplet translation.
  double offset_scale = 1.0;
  std::vector<PlantedTriplet> triplets;
};

/// Builds a store whose triplets realize the planted geometry exactly (up
/// to rounding). Each triangle is laid out in 2-D, placed in a random
/// orthonormal 2-plane of R^dim and translated by a random offset, so equal
/// seeds give identical stores and different seeds give different
/// coordinates with the same pairwise distances.
///
/// Throws InputError when dim < 2, a side is negative or non-finite, the
/// sides violate the triangle inequality, or an id repeats.
EmbeddingStore synth_embeddings(const SynthSpec& spec, std::uint64_t seed);

}  // namespace vlscore
