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

#ifndef COFOLLOW_CORPUS_H_
#define COFOLLOW_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cofollow {

// One user and the accounts they follow. Followees are unique and keep the
// order of first appearance in the input line.
struct FollowRecord {
  std::string user_id;
  std::vector<std::string> followees;

  bool operator==(const FollowRecord&) const = default;
};

// Reads the follow-records format:
//   user_id<TAB>followee( followee)*
// Blank lines and lines starting with '#' are skipped. `source` only labels
// error messages.
std::vector<FollowRecord> parse_follow_records(std::istream& in,
                                               std::string_view source = "<input>");
std::vector<FollowRecord> parse_follow_records_text(std::string_view text);
std::vector<FollowRecord> read_follow_records(const std::string& path);

void write_follow_records(std::ostream& out,
                          std::span<const FollowRecord> records);

struct VocabEntry {
  std::uint32_t index = 0;
  std::string entity_id;
  std::uint64_t follower_count = 0;

  bool operator==(const VocabEntry&) const = default;
};

// Popular-entity set. Entries are ordered by follower_count descending, then
// entity_id ascending (byte order); index i is the position in that order.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Validates ordering, contiguity, uniqueness and the k threshold.
  Vocabulary(std::vector<VocabEntry> entries, std::uint64_t min_followers);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::uint64_t min_followers() const { return min_followers_; }
  const std::vector<VocabEntry>& entries() const { return entries_; }
  const VocabEntry& operator[](std::size_t i) const { return entries_[i]; }

  std::optional<std::uint32_t> find(std::string_view entity_id) const;
  std::vector<std::uint64_t> counts() const;

  // TSV with header `index	entity_id	follower_count`.
  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  // min_followers of a loaded vocabulary is its smallest follower_count.
  static Vocabulary load(std::istream& in, std::string_view source = "<input>");
  static Vocabulary load(const std::string& path);

  // The threshold is not persisted, so equality compares entries only.
  bool operator==(const Vocabulary& other) const {
    return entries_ == other.entries_;
  }

 private:
  std::vector<VocabEntry> entries_;
  std::uint64_t min_followers_ = 1;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Entities followed by at least `min_followers` users, counted over records
// whose raw followee count is at most `max_follows`.
Vocabulary build_vocabulary(std::span<const FollowRecord> records,
                            std::uint64_t min_followers,
                            std::uint64_t max_follows);

// Per-user sets of vocabulary indices ready for training.
struct ContextCorpus {
  std::vector<std::vector<std::uint32_t>> user_sets;
  std::uint64_t total_tokens = 0;
  // Number of retained sets containing each entity; sized to the vocabulary.
  std::vector<std::uint64_t> entity_counts;

  bool empty() const { return user_sets.empty(); }
};

// Maps each record with raw size <= max_follows to its in-vocabulary
// followee indices; sets with fewer than two entries are dropped.
ContextCorpus encode_contexts(std::span<const FollowRecord> records,
                              const Vocabulary& vocab,
                              std::uint64_t max_follows);

// Builds a corpus directly from index sets (tests, synthetic data).
ContextCorpus make_context_corpus(std::vector<std::vector<std::uint32_t>> sets,
                                  std::size_t vocab_size);

// Probability of keeping one occurrence of an entity with corpus frequency
// fraction f under threshold t: min(1, sqrt(t / f)). t may be +inf.
double keep_probability(double frequency_fraction, double threshold);

struct HistogramBucket {
  std::uint64_t lower = 0;
  // Exclusive; nullopt for the open last bucket.
  std::optional<std::uint64_t> upper;
  std::uint64_t account_count = 0;

  bool operator==(const HistogramBucket&) const = default;
};

inline const std::vector<std::uint64_t>& default_histogram_edges() {
  static const std::vector<std::uint64_t> edges = {1, 100, 1000, 10000, 25000};
  return edges;
}

// Number of distinct accounts per follower-count bucket. `edges` are the
// strictly increasing lower bounds, starting at 1; the last bucket is open.
std::vector<HistogramBucket> follower_histogram(
    std::span<const FollowRecord> records,
    std::span<const std::uint64_t> edges = default_histogram_edges());

void write_histogram(std::ostream& out, std::span<const HistogramBucket> buckets);

}  // namespace cofollow

#endif  // COFOLLOW_CORPUS_H_
