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

#include "cofollow/embedding_store.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "cofollow/corpus.h"
#include "cofollow/error.h"
#include "cofollow/trainer.h"
#include "text_io.h"

namespace cofollow {

EmbeddingStore::EmbeddingStore(std::vector<std::string> entity_ids,
                               std::size_t dim, std::vector<double> vectors)
    : entity_ids_(std::move(entity_ids)),
      dim_(dim),
      vectors_(std::move(vectors)) {
  if (dim_ == 0 && !entity_ids_.empty())
    throw DomainError("embedding dimension must be >= 1");
  if (vectors_.size() != entity_ids_.size() * dim_)
    throw DomainError("embedding table shape does not match ids x dim");
  index_.reserve(entity_ids_.size());
  for (std::size_t i = 0; i < entity_ids_.size(); ++i) {
    if (entity_ids_[i].empty()) throw DomainError("empty entity id");
    if (!index_.emplace(entity_ids_[i], i).second)
      throw DomainError("duplicate entity id " + entity_ids_[i]);
  }
  for (double x : vectors_)
    if (!std::isfinite(x)) throw DomainError("non-finite embedding value");
}

EmbeddingStore EmbeddingStore::from_model(const EmbeddingModel& model,
                                          const Vocabulary& vocab) {
  if (model.vocab_size() != vocab.size())
    throw DomainError("model and vocabulary sizes differ");
  std::vector<std::string> ids;
  ids.reserve(vocab.size());
  for (const VocabEntry& e : vocab.entries()) ids.push_back(e.entity_id);
  return EmbeddingStore(std::move(ids), model.dim(), model.target_table());
}

std::optional<std::size_t> EmbeddingStore::find(std::string_view entity_id) const {
  auto it = index_.find(std::string(entity_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingStore::index_of(std::string_view entity_id) const {
  if (auto idx = find(entity_id)) return *idx;
  throw LookupError("unknown entity '" + std::string(entity_id) + "'");
}

std::string format_value(double value) {
  char buf[48];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 9);
  std::string text(buf, end);
  if (text.find_first_of(".en") == std::string::npos) text += ".0";
  return text;
}

void save_embeddings(const EmbeddingStore& store, std::ostream& out) {
  out << store.size() << ' ' << store.dim() << '\n';
  std::string line;
  for (std::size_t i = 0; i < store.size(); ++i) {
    line = store.entity_ids()[i];
    for (double x : store.vector(i)) {
      line += ' ';
      line += format_value(x);
    }
    line += '\n';
    out << line;
  }
}

void save_embeddings(const EmbeddingStore& store, const std::string& path) {
  auto out = internal::open_output(path);
  save_embeddings(store, out);
  internal::finish_output(out, path);
}

EmbeddingStore load_embeddings(std::istream& in, std::string_view source) {
  const std::string src(source);
  std::string raw;
  std::size_t line_no = 0;

  std::size_t n_rows = 0;
  std::size_t dim = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = internal::strip_cr(raw);
    if (internal::is_blank(line)) continue;
    const auto fields = internal::split_whitespace(line);
    const auto v = fields.size() == 2 ? internal::parse_uint(fields[0])
                                      : std::nullopt;
    const auto d = fields.size() == 2 ? internal::parse_uint(fields[1])
                                      : std::nullopt;
    if (!v || !d || *d == 0)
      throw ParseError(src, line_no, "expected header 'V D' with D >= 1");
    n_rows = *v;
    dim = *d;
    break;
  }
  if (line_no == 0 || dim == 0) throw ParseError(src, 0, "missing 'V D' header");

  std::vector<std::string> ids;
  std::vector<double> vectors;
  ids.reserve(n_rows);
  vectors.reserve(n_rows * dim);
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = internal::strip_cr(raw);
    if (internal::is_blank(line)) continue;
    const auto fields = internal::split_whitespace(line);
    if (fields.size() != dim + 1)
      throw ParseError(src, line_no,
                       "dimension mismatch: expected " + std::to_string(dim) +
                           " values, got " + std::to_string(fields.size() - 1));
    if (ids.size() == n_rows)
      throw ParseError(src, line_no,
                       "more rows than the header's " + std::to_string(n_rows));
    std::string id(fields[0]);
    if (!seen.emplace(id, ids.size()).second)
      throw ParseError(src, line_no, "duplicate entity id " + id);
    for (std::size_t k = 1; k <= dim; ++k) {
      const auto x = internal::parse_double(fields[k]);
      if (!x) throw ParseError(src, line_no, "malformed value '" +
                                                 std::string(fields[k]) + "'");
      if (!std::isfinite(*x))
        throw ParseError(src, line_no, "non-finite value for " + id);
      vectors.push_back(*x);
    }
    ids.push_back(std::move(id));
  }
  if (in.bad()) throw IoError("read failed: " + src);
  if (ids.size() != n_rows)
    throw ParseError(src, line_no,
                     "expected " + std::to_string(n_rows) + " rows, found " +
                         std::to_string(ids.size()));
  return EmbeddingStore(std::move(ids), dim, std::move(vectors));
}

EmbeddingStore load_embeddings(const std::string& path) {
  auto in = internal::open_input(path);
  return load_embeddings(in, path);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DomainError("cosine of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine of a zero-norm vector");
  // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): exact 1 for a == b.
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingStore& store,
                                        std::string_view entity_id,
                                        std::size_t top_k) {
  if (top_k < 1) throw DomainError("top_k must be >= 1");
  const std::size_t query = store.index_of(entity_id);
  const auto q = store.vector(query);

  std::vector<Neighbor> all;
  all.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (i == query) continue;
    all.push_back({store.entity_ids()[i], cosine_similarity(q, store.vector(i))});
  }
  const std::size_t k = std::min(top_k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k),
                    all.end(), [](const Neighbor& a, const Neighbor& b) {
                      if (a.similarity != b.similarity)
                        return a.similarity > b.similarity;
                      return a.entity_id < b.entity_id;
                    });
  all.resize(k);
  return all;
}

}  // namespace cofollow
