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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vlscore/types.hpp"

namespace vlscore {

/// Id-to-vector map for one embedding model.
///
/// All vectors share `dim()`. Insertion order is kept so that writing a store
/// back out is deterministic. `constant_C` is the per-model normalizer of the
/// triangle-area score and is always positive.
class EmbeddingStore {
 public:
  EmbeddingStore(std::uint32_t dim, std::string model_tag, double constant_C);

  std::uint32_t dim() const noexcept { return dim_; }
  const std::string& model_tag() const noexcept { return model_tag_; }
  double constant_C() const noexcept { return constant_C_; }
  std::size_t size() const noexcept { return ids_.size(); }

  // Ids in insertion order.
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  void set_constant_C(double c);

  // Throws InputError on duplicate id, empty id or dim mismatch.
  void add(std::string id, Vector v);

  bool contains(std::string_view id) const;
  // Throws InputError naming the id when it is absent.
  const Vector& at(std::string_view id) const;

 private:
  std::uint32_t dim_;
  std::string model_tag_;
  double constant_C_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, Vector> entries_;
};

inline constexpr char kEmbeddingMagic[4] = {'V', 'L', 'S', 'E'};
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

// Binary layout, all integers and floats little-endian:
//   "VLSE" | u32 version | u32 dim | u64 count | u16 tag_len | tag
//   | f64 constant_C | count x (u16 id_len | id | dim x f32)
// Coordinates are narrowed to f32 on write.
void write_embeddings(std::ostream& out, const EmbeddingStore& store);
void save_embeddings(const std::filesystem::path& path, const EmbeddingStore& store);

EmbeddingStore read_embeddings(std::istream& in, const std::string& source = "<embeddings>");
EmbeddingStore load_embeddings(const std::filesystem::path& path);

}  // namespace vlscore
