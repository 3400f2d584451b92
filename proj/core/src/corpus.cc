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

#include "cofollow/corpus.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "cofollow/error.h"
#include "text_io.h"

namespace cofollow {

std::vector<FollowRecord> parse_follow_records(std::istream& in,
                                               std::string_view source) {
  const std::string src(source);
  std::vector<FollowRecord> records;
  std::string raw;
  std::size_t line_no = 0;
  std::unordered_set<std::string_view> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = internal::strip_cr(raw);
    if (internal::is_skippable(line)) continue;

    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw ParseError(src, line_no, "expected TAB after user id");
    const std::string_view user = line.substr(0, tab);
    if (user.empty()) throw ParseError(src, line_no, "empty user id");
    for (char c : user)
      if (internal::is_space(c))
        throw ParseError(src, line_no, "user id contains whitespace");

    FollowRecord record;
    record.user_id = std::string(user);
    seen.clear();
    for (std::string_view token :
         internal::split_whitespace(line.substr(tab + 1))) {
      if (seen.insert(token).second) record.followees.emplace_back(token);
    }
    records.push_back(std::move(record));
  }
  if (in.bad()) throw IoError("read failed: " + src);
  return records;
}

std::vector<FollowRecord> parse_follow_records_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_follow_records(in);
}

std::vector<FollowRecord> read_follow_records(const std::string& path) {
  auto in = internal::open_input(path);
  return parse_follow_records(in, path);
}

void write_follow_records(std::ostream& out,
                          std::span<const FollowRecord> records) {
  for (const FollowRecord& r : records) {
    out << r.user_id << '\t';
    for (std::size_t i = 0; i < r.followees.size(); ++i) {
      if (i > 0) out << ' ';
      out << r.followees[i];
    }
    out << '\n';
  }
}

namespace {

bool vocab_order(const VocabEntry& a, const VocabEntry& b) {
  if (a.follower_count != b.follower_count)
    return a.follower_count > b.follower_count;
  return a.entity_id < b.entity_id;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<VocabEntry> entries,
                       std::uint64_t min_followers)
    : entries_(std::move(entries)), min_followers_(min_followers) {
  if (min_followers_ < 1) throw DomainError("min_followers must be >= 1");
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const VocabEntry& e = entries_[i];
    if (e.index != i)
      throw DomainError("vocabulary indices must be contiguous from 0");
    if (e.entity_id.empty()) throw DomainError("empty entity id");
    if (e.follower_count < min_followers_)
      throw DomainError("entity " + e.entity_id + " below min_followers");
    if (i > 0 && !vocab_order(entries_[i - 1], e))
      throw DomainError("vocabulary not in (count desc, id asc) order at " +
                        e.entity_id);
    if (!index_.emplace(e.entity_id, e.index).second)
      throw DomainError("duplicate entity id " + e.entity_id);
  }
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view entity_id) const {
  auto it = index_.find(std::string(entity_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint64_t> Vocabulary::counts() const {
  std::vector<std::uint64_t> out;
  out.reserve(entries_.size());
  for (const VocabEntry& e : entries_) out.push_back(e.follower_count);
  return out;
}

void Vocabulary::save(std::ostream& out) const {
  out << "index\tentity_id\tfollower_count\n";
  for (const VocabEntry& e : entries_)
    out << e.index << '\t' << e.entity_id << '\t' << e.follower_count << '\n';
}

void Vocabulary::save(const std::string& path) const {
  auto out = internal::open_output(path);
  save(out);
  internal::finish_output(out, path);
}

Vocabulary Vocabulary::load(std::istream& in, std::string_view source) {
  const std::string src(source);
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<VocabEntry> entries;
  std::uint64_t min_count = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = internal::strip_cr(raw);
    if (internal::is_blank(line)) continue;
    if (!header_seen) {
      if (line != "index\tentity_id\tfollower_count")
        throw ParseError(src, line_no, "expected vocabulary header");
      header_seen = true;
      continue;
    }
    const auto fields = internal::split_char(line, '\t');
    if (fields.size() != 3)
      throw ParseError(src, line_no, "expected 3 TAB-separated fields");
    const auto index = internal::parse_uint(fields[0]);
    const auto count = internal::parse_uint(fields[2]);
    if (!index || !count || *count == 0 || fields[1].empty())
      throw ParseError(src, line_no, "malformed vocabulary row");
    if (*index != entries.size())
      throw ParseError(src, line_no, "non-contiguous index");
    entries.push_back({static_cast<std::uint32_t>(*index),
                       std::string(fields[1]), *count});
    min_count = min_count == 0 ? *count : std::min(min_count, *count);
  }
  if (!header_seen) throw ParseError(src, 0, "missing vocabulary header");
  try {
    return Vocabulary(std::move(entries), std::max<std::uint64_t>(min_count, 1));
  } catch (const DomainError& e) {
    throw ParseError(src, 0, e.what());
  }
}

Vocabulary Vocabulary::load(const std::string& path) {
  auto in = internal::open_input(path);
  return load(in, path);
}

Vocabulary build_vocabulary(std::span<const FollowRecord> records,
                            std::uint64_t min_followers,
                            std::uint64_t max_follows) {
  if (min_followers < 1) throw DomainError("min_followers must be >= 1");
  if (max_follows < 1) throw DomainError("max_follows must be >= 1");

  std::unordered_map<std::string_view, std::uint64_t> counts;
  for (const FollowRecord& r : records) {
    if (r.followees.size() > max_follows) continue;
    for (const std::string& f : r.followees) ++counts[f];
  }

  std::vector<VocabEntry> entries;
  for (const auto& [id, count] : counts)
    if (count >= min_followers) entries.push_back({0, std::string(id), count});
  std::sort(entries.begin(), entries.end(), vocab_order);
  for (std::size_t i = 0; i < entries.size(); ++i)
    entries[i].index = static_cast<std::uint32_t>(i);
  return Vocabulary(std::move(entries), min_followers);
}

ContextCorpus encode_contexts(std::span<const FollowRecord> records,
                              const Vocabulary& vocab,
                              std::uint64_t max_follows) {
  ContextCorpus corpus;
  corpus.entity_counts.assign(vocab.size(), 0);
  std::vector<std::uint32_t> set;
  for (const FollowRecord& r : records) {
    if (r.followees.size() > max_follows) continue;
    set.clear();
    for (const std::string& f : r.followees)
      if (auto idx = vocab.find(f)) set.push_back(*idx);
    if (set.size() < 2) continue;
    for (std::uint32_t idx : set) ++corpus.entity_counts[idx];
    corpus.total_tokens += set.size();
    corpus.user_sets.push_back(set);
  }
  return corpus;
}

ContextCorpus make_context_corpus(std::vector<std::vector<std::uint32_t>> sets,
                                  std::size_t vocab_size) {
  ContextCorpus corpus;
  corpus.entity_counts.assign(vocab_size, 0);
  for (auto& set : sets) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    if (set.size() < 2) continue;
    for (std::uint32_t idx : set) {
      if (idx >= vocab_size)
        throw LookupError("entity index " + std::to_string(idx) +
                          " outside vocabulary of " + std::to_string(vocab_size));
      ++corpus.entity_counts[idx];
    }
    corpus.total_tokens += set.size();
    corpus.user_sets.push_back(std::move(set));
  }
  return corpus;
}

double keep_probability(double frequency_fraction, double threshold) {
  if (!(frequency_fraction > 0.0))
    throw DomainError("frequency fraction must be > 0");
  if (!(threshold > 0.0)) throw DomainError("subsample threshold must be > 0");
  if (std::isinf(threshold) || frequency_fraction <= threshold) return 1.0;
  return std::min(1.0, std::sqrt(threshold / frequency_fraction));
}

std::vector<HistogramBucket> follower_histogram(
    std::span<const FollowRecord> records,
    std::span<const std::uint64_t> edges) {
  if (edges.empty() || edges.front() != 1)
    throw DomainError("histogram edges must start at 1");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (edges[i] <= edges[i - 1])
      throw DomainError("histogram edges must be strictly increasing");

  std::vector<HistogramBucket> buckets(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    buckets[i].lower = edges[i];
    if (i + 1 < edges.size()) buckets[i].upper = edges[i + 1];
  }

  std::unordered_map<std::string_view, std::uint64_t> counts;
  for (const FollowRecord& r : records)
    for (const std::string& f : r.followees) ++counts[f];

  for (const auto& [id, count] : counts) {
    auto it = std::upper_bound(edges.begin(), edges.end(), count);
    ++buckets[static_cast<std::size_t>(it - edges.begin()) - 1].account_count;
  }
  return buckets;
}

void write_histogram(std::ostream& out,
                     std::span<const HistogramBucket> buckets) {
  out << "lower\tupper\taccount_count\n";
  for (const HistogramBucket& b : buckets) {
    out << b.lower << '\t';
    if (b.upper)
      out << *b.upper;
    else
      out << "inf";
    out << '\t' << b.account_count << '\n';
  }
}

}  // namespace cofollow
