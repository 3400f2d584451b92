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

#include "cofollow/polarity.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "cofollow/error.h"
#include "text_io.h"

namespace cofollow {

namespace {

void check_anchors(const Anchors& anchors) {
  if (anchors.republican == anchors.democratic)
    throw DomainError("anchors must be distinct");
}

double po_from_vectors(std::span<const double> entity,
                       std::span<const double> republican,
                       std::span<const double> democratic) {
  return cosine_similarity(republican, entity) -
         cosine_similarity(democratic, entity);
}

}  // namespace

double political_orientation(const EmbeddingStore& store,
                             std::string_view entity, const Anchors& anchors) {
  check_anchors(anchors);
  return po_from_vectors(store.vector(entity), store.vector(anchors.republican),
                         store.vector(anchors.democratic));
}

PolarityRanking rank_by_po(const EmbeddingStore& store,
                           std::span<const std::string> entities,
                           const Anchors& anchors,
                           const FollowerCounts& follower_counts) {
  if (entities.empty()) throw DomainError("no entities to rank");
  check_anchors(anchors);
  const auto republican = store.vector(anchors.republican);
  const auto democratic = store.vector(anchors.democratic);

  PolarityRanking ranking;
  for (const std::string& id : entities) {
    const auto idx = store.find(id);
    if (!idx) {
      ranking.missing.push_back(id);
      continue;
    }
    PolarityResult r;
    r.entity_id = id;
    r.po_score = po_from_vectors(store.vector(*idx), republican, democratic);
    if (auto it = follower_counts.find(id); it != follower_counts.end())
      r.n_followers = it->second;
    ranking.results.push_back(std::move(r));
  }
  std::sort(ranking.results.begin(), ranking.results.end(),
            [](const PolarityResult& a, const PolarityResult& b) {
              if (a.po_score != b.po_score) return a.po_score > b.po_score;
              return a.entity_id < b.entity_id;
            });
  return ranking;
}

std::vector<double> fractional_ranks(std::span<const double> values) {
  for (double v : values)
    if (std::isnan(v)) throw DomainError("NaN in ranked values");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = mean_rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DomainError("spearman inputs have different lengths");
  if (a.size() < 2) throw DomainError("spearman needs at least 2 values");
  const auto ra = fractional_ranks(a);
  const auto rb = fractional_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mean_b = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean_a;
    const double db = rb[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0)
    throw DomainError("spearman undefined: constant ranking");
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

PolarityAccuracy binary_polarity_accuracy(
    std::span<const PolarityResult> results,
    const std::unordered_map<std::string, double>& gold) {
  if (results.empty()) throw DomainError("no polarity results to score");
  PolarityAccuracy acc;
  for (const PolarityResult& r : results) {
    auto it = gold.find(r.entity_id);
    if (it == gold.end())
      throw LookupError("no gold score for entity '" + r.entity_id + "'");
    if (it->second == 0.0 || std::isnan(it->second))
      throw DomainError("gold score for '" + r.entity_id + "' has no sign");
    ++acc.total;
    if (r.po_score == 0.0) {
      ++acc.unclassified;
      continue;
    }
    if ((r.po_score > 0.0) == (it->second > 0.0)) ++acc.correct;
  }
  acc.accuracy = static_cast<double>(acc.correct) / static_cast<double>(acc.total);
  return acc;
}

std::vector<PolarityResult> reliability_filter(
    std::span<const PolarityResult> results, std::uint64_t min_followers) {
  std::vector<PolarityResult> out;
  for (const PolarityResult& r : results)
    if (r.n_followers >= min_followers) out.push_back(r);
  return out;
}

Anchors parse_anchors(std::istream& in, std::string_view source) {
  const std::string src(source);
  Anchors anchors;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = internal::strip_cr(raw);
    if (internal::is_skippable(line)) continue;
    const auto fields = internal::split_char(line, '\t');
    if (fields.size() != 2 || fields[1].empty())
      throw ParseError(src, line_no, "expected 'R|D<TAB>entity_id'");
    std::string* slot = nullptr;
    if (fields[0] == "R")
      slot = &anchors.republican;
    else if (fields[0] == "D")
      slot = &anchors.democratic;
    else
      throw ParseError(src, line_no, "anchor pole must be R or D");
    if (!slot->empty())
      throw ParseError(src, line_no, "anchor pole given twice");
    *slot = std::string(fields[1]);
  }
  if (anchors.republican.empty() || anchors.democratic.empty())
    throw ParseError(src, line_no, "anchors file needs both R and D");
  if (anchors.republican == anchors.democratic)
    throw ParseError(src, line_no, "R and D anchors are the same entity");
  return anchors;
}

Anchors read_anchors(const std::string& path) {
  auto in = internal::open_input(path);
  return parse_anchors(in, path);
}

void write_anchors(std::ostream& out, const Anchors& anchors) {
  out << "R\t" << anchors.republican << "\nD\t" << anchors.democratic << '\n';
}

std::vector<std::string> read_targets(const std::string& path) {
  auto in = internal::open_input(path);
  std::vector<std::string> targets;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = internal::strip_cr(raw);
    if (internal::is_skippable(line)) continue;
    const auto fields = internal::split_whitespace(line);
    if (fields.size() != 1)
      throw ParseError(path, line_no, "expected one entity id");
    targets.emplace_back(fields[0]);
  }
  return targets;
}

std::unordered_map<std::string, double> parse_gold(std::istream& in,
                                                   std::string_view source) {
  const std::string src(source);
  std::unordered_map<std::string, double> gold;
  std::string raw;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = internal::strip_cr(raw);
    if (internal::is_skippable(line)) continue;
    if (first && line == "entity_id\tscore") {
      first = false;
      continue;
    }
    first = false;
    const auto fields = internal::split_char(line, '\t');
    const auto score =
        fields.size() == 2 ? internal::parse_double(fields[1]) : std::nullopt;
    if (!score || fields[0].empty() || !std::isfinite(*score))
      throw ParseError(src, line_no, "expected 'entity_id<TAB>score'");
    if (!gold.emplace(std::string(fields[0]), *score).second)
      throw ParseError(src, line_no, "duplicate entity " + std::string(fields[0]));
  }
  return gold;
}

std::unordered_map<std::string, double> read_gold(const std::string& path) {
  auto in = internal::open_input(path);
  return parse_gold(in, path);
}

void write_polarity_results(std::ostream& out,
                            std::span<const PolarityResult> results) {
  out << "entity_id\tpo_score\tn_followers\n";
  for (const PolarityResult& r : results)
    out << r.entity_id << '\t' << format_value(r.po_score) << '\t'
        << r.n_followers << '\n';
}

}  // namespace cofollow
