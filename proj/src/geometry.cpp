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

#include "vlscore/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "vlscore/error.hpp"

namespace vlscore::geometry {

namespace {

void require_same_dim(const Vector& a, const Vector& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw InputError(std::string(op) + ": dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()) + ")");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

std::vector<double> diff(const Vector& a, const Vector& b) {
  std::vector<double> d(a.dim());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = a[k] - b[k];
  return d;
}

double cosine(std::span<const double> a, std::span<const double> b, const char* op) {
  const double aa = dot(a, a);
  const double bb = dot(b, b);
  if (aa == 0.0 || bb == 0.0) throw UndefinedMeasureError(std::string(op) + ": zero vector has no direction");
  const double c = dot(a, b) / (std::sqrt(aa) * std::sqrt(bb));
  return std::clamp(c, -1.0, 1.0);
}

double squared_distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace

double triangle_area(const Vector& image, const Vector& candidate, const Vector& reference) {
  require_same_dim(image, candidate, "triangle_area");
  require_same_dim(image, reference, "triangle_area");
  const auto to_candidate = diff(image, candidate);
  const auto to_reference = diff(image, reference);
  const double gg = dot(to_candidate, to_candidate);
  const double rr = dot(to_reference, to_reference);
  const double gr = dot(to_candidate, to_reference);
  const double radicand = gg * rr - gr * gr;
  if (radicand < 0.0) {
    if (radicand < -kRadicandTolerance * gg * rr) {
      throw ConsistencyError("triangle_area: Gram radicand " + std::to_string(radicand) +
                             " is negative beyond rounding tolerance");
    }
    return 0.0;
  }
  return 0.5 * std::sqrt(radicand);
}

double vlscore_from_area(double area, double constant_C, bool* clamped) {
  if (!(constant_C > 0.0)) throw InputError("vlscore: constant C must be positive");
  const double score = 1.0 - area / constant_C;
  const bool floor_hit = score <= 0.0;
  if (clamped) *clamped = floor_hit;
  return floor_hit ? 0.0 : score;
}

double vlscore(const Vector& image, const Vector& candidate, const Vector& reference,
               const TriangleScoreConfig& cfg) {
  if (!(cfg.constant_C > 0.0)) throw InputError("vlscore: constant C must be positive");
  return vlscore_from_area(triangle_area(image, candidate, reference), cfg.constant_C);
}

double cosine_similarity(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "cosine_similarity");
  return cosine(a.values(), b.values(), "cosine_similarity");
}

double image_centered_cosine(const Vector& image, const Vector& candidate, const Vector& reference) {
  require_same_dim(image, candidate, "image_centered_cosine");
  require_same_dim(image, reference, "image_centered_cosine");
  const auto to_reference = diff(reference, image);
  const auto to_candidate = diff(candidate, image);
  if (dot(to_reference, to_reference) == 0.0 || dot(to_candidate, to_candidate) == 0.0) {
    throw UndefinedMeasureError("image_centered_cosine: a report embedding coincides with the image embedding");
  }
  return cosine(to_reference, to_candidate, "image_centered_cosine");
}

Sphere min_enclosing_sphere(const Vector& a, const Vector& b, const Vector& c) {
  require_same_dim(a, b, "min_enclosing_sphere");
  require_same_dim(a, c, "min_enclosing_sphere");
  const std::size_t dim = a.dim();

  // Squared side lengths, each indexed by its opposite vertex.
  const double opp_a = squared_distance(b, c);
  const double opp_b = squared_distance(a, c);
  const double opp_c = squared_distance(a, b);

  const auto u = diff(b, a);
  const auto v = diff(c, a);
  const double uu = opp_c;
  const double vv = opp_b;
  const double uv = dot(u, v);
  const double gram = std::max(0.0, uu * vv - uv * uv);
  const double area = 0.5 * std::sqrt(gram);

  const double longest = std::max({opp_a, opp_b, opp_c});
  const double others = opp_a + opp_b + opp_c - longest;
  if (longest == 0.0 || area < kCollinearTolerance * longest || longest >= others) {
    const Vector* p = &b;
    const Vector* q = &c;
    if (longest == opp_b) {
      p = &a;
      q = &c;
    }
    if (longest == opp_c) {
      p = &a;
      q = &b;
    }
    Sphere s;
    s.center.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) s.center[k] = 0.5 * ((*p)[k] + (*q)[k]);
    s.radius = 0.5 * std::sqrt(longest);
    return s;
  }

  // Acute: circumcenter a + alpha*u + beta*v, from the two bisector equations.
  const double alpha = vv * (uu - uv) / (2.0 * gram);
  const double beta = uu * (vv - uv) / (2.0 * gram);
  Sphere s;
  s.center.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) s.center[k] = a[k] + alpha * u[k] + beta * v[k];
  s.radius = std::sqrt(opp_a) * std::sqrt(opp_b) * std::sqrt(opp_c) / (4.0 * area);
  return s;
}

double min_enclosing_sphere_radius(const Vector& image, const Vector& candidate, const Vector& reference) {
  return min_enclosing_sphere(image, candidate, reference).radius;
}

Calibration calibrate_constant(const EmbeddingStore& store, std::span<const EmbeddingTriplet> triplets) {
  if (triplets.empty()) throw InputError("calibrate_constant: no triplets");
  Calibration cal;
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    const double area = triangle_area(store.at(t.image_id), store.at(t.candidate_id), store.at(t.reference_id));
    if (k == 0 || area > cal.max_area) {
      cal.max_area = area;
      cal.argmax = k;
    }
  }
  if (cal.max_area == 0.0) {
    cal.warnings.push_back("largest triangle area is 0; C must be positive, so it cannot be used as a normalizer");
  }
  return cal;
}

}  // namespace vlscore::geometry
