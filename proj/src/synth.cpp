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

#include "vlscore/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "vlscore/error.hpp"

namespace vlscore {

namespace {

struct Planar {
  double x = 0.0;
  double y = 0.0;
};

struct Layout {
  Planar image;
  Planar candidate;
  Planar reference;
};

void check_side(double s, const std::string& id) {
  if (!std::isfinite(s) || s < 0.0) {
    throw InputError("planted triplet \"" + id + "\": side lengths must be finite and nonnegative");
  }
}

Layout layout_sides(const PlantedSides& s, const std::string& id) {
  const double a = s.image_candidate;
  const double b = s.image_reference;
  const double c = s.candidate_reference;
  check_side(a, id);
  check_side(b, id);
  check_side(c, id);
  const double longest = std::max({a, b, c});
  if (longest > (a + b + c - longest) * (1.0 + 1e-12)) {
    throw InputError("planted triplet \"" + id + "\": sides (" + std::to_string(a) + ", " + std::to_string(b) +
                     ", " + std::to_string(c) + ") violate the triangle inequality");
  }
  Layout l;
  l.candidate = {a, 0.0};
  if (a == 0.0) {
    l.reference = {b, 0.0};
  } else {
    const double x = (a * a + b * b - c * c) / (2.0 * a);
    l.reference = {x, std::sqrt(std::max(0.0, b * b - x * x))};
  }
  return l;
}

Layout layout_area(const PlantedArea& p, const std::string& id) {
  if (!std::isfinite(p.area) || p.area < 0.0) {
    throw InputError("planted triplet \"" + id + "\": area must be finite and nonnegative");
  }
  const double leg = std::sqrt(2.0 * p.area);
  Layout l;
  l.candidate = {leg, 0.0};
  l.reference = {0.0, leg};
  return l;
}

std::vector<double> gaussian(std::mt19937_64& rng, std::uint32_t dim, double scale) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = scale * n(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  for (auto& x : v) x /= n;
}

// Two orthonormal directions spanning a random 2-plane.
std::pair<std::vector<double>, std::vector<double>> random_plane(std::mt19937_64& rng, std::uint32_t dim) {
  auto u = gaussian(rng, dim, 1.0);
  normalize(u);
  auto v = gaussian(rng, dim, 1.0);
  for (int pass = 0; pass < 2; ++pass) {
    const double p = dot(u, v);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] -= p * u[k];
  }
  normalize(v);
  return {std::move(u), std::move(v)};
}

Vector place(const std::vector<double>& offset, const std::vector<double>& u, const std::vector<double>& v,
             Planar p) {
  std::vector<double> out(offset.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = offset[k] + p.x * u[k] + p.y * v[k];
  return Vector(std::move(out));
}

}  // namespace

EmbeddingStore synth_embeddings(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.dim < 2) throw InputError("synthetic embeddings need dim >= 2");
  EmbeddingStore store(spec.dim, spec.model_tag, spec.constant_C);
  std::mt19937_64 rng(seed);
  for (const auto& t : spec.triplets) {
    const Layout l = std::visit(
        [&](const auto& shape) {
          if constexpr (std::is_same_v<std::decay_t<decltype(shape)>, PlantedSides>) {
            return layout_sides(shape, t.image_id);
          } else {
            return layout_area(shape, t.image_id);
          }
        },
        t.shape);
    auto [u, v] = random_plane(rng, spec.dim);
    auto offset = gaussian(rng, spec.dim, spec.offset_scale);
    store.add(t.image_id, place(offset, u, v, l.image));
    store.add(t.candidate_id, place(offset, u, v, l.candidate));
    store.add(t.reference_id, place(offset, u, v, l.reference));
  }
  return store;
}

}  // namespace vlscore
