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

#include "vlscore/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "vlscore/error.hpp"

namespace vlscore {

EmbeddingStore::EmbeddingStore(std::uint32_t dim, std::string model_tag, double constant_C)
    : dim_(dim), model_tag_(std::move(model_tag)), constant_C_(constant_C) {
  if (dim_ == 0) throw InputError("embedding dim must be >= 1");
  set_constant_C(constant_C);
}

void EmbeddingStore::set_constant_C(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InputError("constant_C must be a positive finite number, got " + std::to_string(c));
  }
  constant_C_ = c;
}

void EmbeddingStore::add(std::string id, Vector v) {
  if (id.empty()) throw InputError("embedding id is empty");
  if (v.dim() != dim_) {
    throw InputError("embedding \"" + id + "\" has dim " + std::to_string(v.dim()) + ", store dim is " +
                     std::to_string(dim_));
  }
  auto [it, inserted] = entries_.try_emplace(id, std::move(v));
  if (!inserted) throw InputError("duplicate embedding id \"" + id + "\"");
  ids_.push_back(std::move(id));
}

bool EmbeddingStore::contains(std::string_view id) const {
  return entries_.find(std::string(id)) != entries_.end();
}

const Vector& EmbeddingStore::at(std::string_view id) const {
  auto it = entries_.find(std::string(id));
  if (it == entries_.end()) throw InputError("unresolved embedding id \"" + std::string(id) + "\"");
  return it->second;
}

namespace {

static_assert(std::numeric_limits<float>::is_iec559 && std::numeric_limits<double>::is_iec559);

template <typename T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  auto bits = std::bit_cast<U>(value);
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(buf, sizeof(U));
}

class Reader {
 public:
  Reader(std::istream& in, const std::string& source) : in_(in), source_(source) {}

  template <typename T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
    unsigned char buf[sizeof(U)];
    bytes(reinterpret_cast<char*>(buf), sizeof(U), what);
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
    return std::bit_cast<T>(bits);
  }

  std::string string(std::size_t n, const char* what) {
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw InputError(source_ + ": truncated file while reading " + what + " at byte " + std::to_string(offset_));
    }
    offset_ += n;
  }

  bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::istream& in_;
  const std::string& source_;
  std::uint64_t offset_ = 0;
};

}  // namespace

void write_embeddings(std::ostream& out, const EmbeddingStore& store) {
  if (store.model_tag().size() > std::numeric_limits<std::uint16_t>::max()) {
    throw InputError("model_tag longer than 65535 bytes");
  }
  out.write(kEmbeddingMagic, 4);
  put_le(out, kEmbeddingFormatVersion);
  put_le(out, store.dim());
  put_le(out, static_cast<std::uint64_t>(store.size()));
  put_le(out, static_cast<std::uint16_t>(store.model_tag().size()));
  out.write(store.model_tag().data(), static_cast<std::streamsize>(store.model_tag().size()));
  put_le(out, store.constant_C());
  for (const auto& id : store.ids()) {
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw InputError("embedding id longer than 65535 bytes");
    }
    put_le(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (double x : store.at(id).values()) put_le(out, static_cast<float>(x));
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write embeddings " + path.string());
  write_embeddings(out, store);
  if (!out) throw InputError("write failed for " + path.string());
}

EmbeddingStore read_embeddings(std::istream& in, const std::string& source) {
  Reader r(in, source);
  auto magic = r.string(4, "magic");
  if (std::memcmp(magic.data(), kEmbeddingMagic, 4) != 0) {
    throw InputError(source + ": bad magic (expected \"VLSE\")");
  }
  auto version = r.get<std::uint32_t>("version");
  if (version != kEmbeddingFormatVersion) {
    throw InputError(source + ": unsupported format version " + std::to_string(version));
  }
  auto dim = r.get<std::uint32_t>("dim");
  auto count = r.get<std::uint64_t>("count");
  auto tag_len = r.get<std::uint16_t>("model_tag length");
  auto tag = r.string(tag_len, "model_tag");
  auto constant_C = r.get<double>("constant_C");
  if (dim == 0) throw InputError(source + ": dim is 0");

  EmbeddingStore store(dim, std::move(tag), constant_C);
  std::vector<double> values(dim);
  for (std::uint64_t k = 0; k < count; ++k) {
    auto id_len = r.get<std::uint16_t>("record id length");
    auto id = r.string(id_len, "record id");
    for (std::uint32_t d = 0; d < dim; ++d) {
      float x = r.get<float>("coordinates");
      if (!std::isfinite(x)) {
        throw InputError(source + ": non-finite coordinate " + std::to_string(d) + " in record \"" + id + "\"");
      }
      values[d] = x;
    }
    store.add(std::move(id), Vector(values));
  }
  if (!r.at_eof()) {
    throw InputError(source + ": trailing bytes after " + std::to_string(count) + " records");
  }
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embeddings " + path.string());
  return read_embeddings(in, path.string());
}

}  // namespace vlscore
