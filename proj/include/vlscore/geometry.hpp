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

#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "vlscore/embeddings.hpp"
#include "vlscore/types.hpp"

namespace vlscore::geometry {

inline constexpr double kDefaultConstantC = 890.0;

struct TriangleScoreConfig {
  double constant_C = kDefaultConstantC;
};

// Gram radicands more negative than this fraction of |i-g|^2 |i-r|^2 are
// treated as a logic error rather than rounding.
inline constexpr double kRadicandTolerance = 1e-6;

// Below this fraction of (longest side)^2 a triangle counts as collinear.
inline constexpr double kCollinearTolerance = 1e-12;

/// Area of the triangle spanned by image, candidate and reference embeddings,
///   0.5 * sqrt(<i-g,i-g><i-r,i-r> - <i-g,i-r>^2).
/// Throws InputError on dim mismatch.
double triangle_area(const Vector& image, const Vector& candidate, const Vector& reference);

/// max{1 - T/C, 0}. Throws InputError on dim mismatch or C <= 0.
double vlscore(const Vector& image, const Vector& candidate, const Vector& reference,
               const TriangleScoreConfig& cfg = {});

// Score from an already computed area. True in `clamped` when T >= C.
double vlscore_from_area(double area, double constant_C, bool* clamped = nullptr);

/// Cosine of the angle between a and b, clamped into [-1, 1].
/// Throws InputError for a zero vector or a dim mismatch.
double cosine_similarity(const Vector& a, const Vector& b);

/// Cosine between reference - image and candidate - image.
double image_centered_cosine(const Vector& image, const Vector& candidate, const Vector& reference);

struct Sphere {
  std::vector<double> center;
  double radius = 0.0;
};

// Exact smallest enclosing sphere of three points: the midpoint of the
// longest side for right, obtuse and collinear triangles, the circumsphere
// otherwise.
Sphere min_enclosing_sphere(const Vector& a, const Vector& b, const Vector& c);
double min_enclosing_sphere_radius(const Vector& image, const Vector& candidate, const Vector& reference);

struct EmbeddingTriplet {
  std::string image_id;
  std::string candidate_id;
  std::string reference_id;
};

struct Calibration {
  double max_area = 0.0;
  std::size_t argmax = 0;
  std::vector<std::string> warnings;
};

/// Largest triangle area over the triplets, used as the score normalizer.
/// Throws InputError on an empty list or an unresolved id. A zero maximum is
/// returned with a warning because C must be positive to be usable.
Calibration calibrate_constant(const EmbeddingStore& store, std::span<const EmbeddingTriplet> triplets);

}  // namespace vlscore::geometry
