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

#ifndef COFOLLOW_POLARITY_H_
#define COFOLLOW_POLARITY_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cofollow/embedding_store.h"

namespace cofollow {

struct Anchors {
  std::string republican;
  std::string democratic;
};

struct PolarityResult {
  std::string entity_id;
  double po_score = 0.0;
  std::uint64_t n_followers = 0;

  bool operator==(const PolarityResult&) const = default;
};

using FollowerCounts = std::unordered_map<std::string, std::uint64_t>;

// cos(e_R, e) - cos(e_D, e). Positive leans Republican.
double political_orientation(const EmbeddingStore& store,
                             std::string_view entity, const Anchors& anchors);

struct PolarityRanking {
  // Descending po_score, ties by entity_id.
  std::vector<PolarityResult> results;
  // Requested entities absent from the store.
  std::vector<std::string> missing;
};

PolarityRanking rank_by_po(const EmbeddingStore& store,
                           std::span<const std::string> entities,
                           const Anchors& anchors,
                           const FollowerCounts& follower_counts = {});

// Pearson correlation of fractional (tie-averaged) ranks.
double spearman(std::span<const double> a, std::span<const double> b);

// Mean (1-based) ranks with ties sharing the average of their positions.
std::vector<double> fractional_ranks(std::span<const double> values);

struct PolarityAccuracy {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  // po_score exactly 0; counted wrong.
  std::size_t unclassified = 0;
};

// Sign agreement with `gold`. Throws LookupError naming the first entity
// without a gold entry.
PolarityAccuracy binary_polarity_accuracy(
    std::span<const PolarityResult> results,
    const std::unordered_map<std::string, double>& gold);

std::vector<PolarityResult> reliability_filter(
    std::span<const PolarityResult> results, std::uint64_t min_followers);

// Anchors file: `R<TAB>id` and `D<TAB>id`, either order.
Anchors parse_anchors(std::istream& in, std::string_view source = "<input>");
Anchors read_anchors(const std::string& path);
void write_anchors(std::ostream& out, const Anchors& anchors);

// One entity id per line; blank and '#' lines skipped.
std::vector<std::string> read_targets(const std::string& path);

// `entity_id<TAB>score`.
std::unordered_map<std::string, double> parse_gold(
    std::istream& in, std::string_view source = "<input>");
std::unordered_map<std::string, double> read_gold(const std::string& path);

// `entity_id	po_score	n_followers` rows in ranking order.
void write_polarity_results(std::ostream& out,
                            std::span<const PolarityResult> results);

}  // namespace cofollow

#endif  // COFOLLOW_POLARITY_H_
