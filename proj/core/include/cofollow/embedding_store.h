/*
 * Copyright 2026 The cofollow Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef COFOLLOW_EMBEDDING_STORE_H_
#define COFOLLOW_EMBEDDING_STORE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cofollow {

class Vocabulary;
class EmbeddingModel;

// Immutable id -> vector table.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  // Throws DomainError on duplicate ids, shape mismatch or non-finite values.
  EmbeddingStore(std::vector<std::string> entity_ids, std::size_t dim,
                 std::vector<double> vectors);

  // Target vectors of `model` keyed by the vocabulary ids.
  static EmbeddingStore from_model(const EmbeddingModel& model,
                                   const Vocabulary& vocab);

  std::size_t size() const { return entity_ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& entity_ids() const { return entity_ids_; }
  const std::vector<double>& data() const { return vectors_; }

  std::optional<std::size_t> find(std::string_view entity_id) const;
  bool contains(std::string_view entity_id) const {
    return find(entity_id).has_value();
  }
  // Throws LookupError for unknown ids.
  std::size_t index_of(std::string_view entity_id) const;

  std::span<const double> vector(std::size_t i) const {
    return {vectors_.data() + i * dim_, dim_};
  }
  std::span<const double> vector(std::string_view entity_id) const {
    return vector(index_of(entity_id));
  }

  bool operator==(const EmbeddingStore& other) const {
    return dim_ == other.dim_ && entity_ids_ == other.entity_ids_ &&
           vectors_ == other.vectors_;
  }

 private:
  std::vector<std::string> entity_ids_;
  std::size_t dim_ = 0;
  std::vector<double> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Text form of one value: rounded to 9 significant digits, shortest digits
// for that rounded value, and a trailing ".0" when it would read as an
// integer.
std::string format_value(double value);

// Line 1 `V D`, then `entity_id v_1 ... v_D` per entity.
void save_embeddings(const EmbeddingStore& store, std::ostream& out);
void save_embeddings(const EmbeddingStore& store, const std::string& path);
EmbeddingStore load_embeddings(std::istream& in,
                               std::string_view source = "<input>");
EmbeddingStore load_embeddings(const std::string& path);

// a.b / (|a||b|) clamped to [-1, 1]. Throws DomainError on zero norm or a
// length mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct Neighbor {
  std::string entity_id;
  double similarity = 0.0;

  bool operator==(const Neighbor&) const = default;
};

// The top_k other entities by cosine to `entity_id`, ties by id.
std::vector<Neighbor> nearest_neighbors(const EmbeddingStore& store,
                                        std::string_view entity_id,
                                        std::size_t top_k);

}  // namespace cofollow

#endif  // COFOLLOW_EMBEDDING_STORE_H_
