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

#include "cofollow/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <random>

#include "cofollow/embedding_store.h"
#include "cofollow/error.h"
#include "cofollow/polarity.h"
#include "text_io.h"

namespace cofollow {

void SynthConfig::validate() const {
  if (n_communities < 2) throw DomainError("need at least 2 communities");
  if (n_entities < n_communities)
    throw DomainError("n_entities must be >= number of communities");
  if (n_users < 1) throw DomainError("n_users must be >= 1");
  if (!(follows_mean >= 2.0)) throw DomainError("follows_mean must be >= 2");
  if (!(mixing >= 0.0 && mixing <= 1.0))
    throw DomainError("mixing must be in [0, 1]");
  if (!(zipf_exponent >= 0.0) || !std::isfinite(zipf_exponent))
    throw DomainError("zipf exponent must be finite and >= 0");
  if (!(attribute_noise >= 0.0 && attribute_noise <= 0.5))
    throw DomainError("attribute noise must be in [0, 0.5]");
  if (republican_community >= n_communities ||
      democratic_community >= n_communities)
    throw DomainError("polarity axis community out of range");
  if (republican_community == democratic_community)
    throw DomainError("polarity axis communities must differ");
}

namespace {

std::string padded_id(char prefix, std::size_t i, std::size_t n) {
  const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
  std::string digits = std::to_string(i);
  return std::string(1, prefix) + std::string(width - digits.size(), '0') +
         digits;
}

std::vector<double> cumulative(const std::vector<double>& weights) {
  std::vector<double> cum(weights.size());
  double total = 0.0;
  for (double w : weights) total += w;
  double running = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    running += weights[i] / total;
    cum[i] = running;
  }
  cum.back() = 1.0;
  return cum;
}

std::size_t draw_from(const std::vector<double>& cum, RandomEngine& rng) {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return std::min(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}

}  // namespace

SyntheticWorld generate_world(const SynthConfig& config) {
  config.validate();
  const std::size_t g = config.n_communities;
  RandomEngine rng(derive_seed(config.seed, 0x3017D));

  SyntheticWorld world;
  const std::size_t n_e = config.n_entities;
  world.entity_ids.resize(n_e);
  world.entity_community.resize(n_e);
  world.entity_popularity.resize(n_e);
  world.entity_appeal.resize(n_e);
  world.entity_polarity_intensity.resize(n_e);
  world.community_members.assign(g, {});

  for (std::size_t e = 0; e < n_e; ++e) {
    world.entity_ids[e] = padded_id('e', e, n_e);
    const std::size_t c = e % g;
    world.entity_community[e] = c;
    const double rank = static_cast<double>(world.community_members[c].size() + 1);
    world.entity_popularity[e] = std::pow(rank, -config.zipf_exponent);
    world.entity_appeal[e] = 1.0 - uniform01(rng);  // (0, 1]
    world.community_members[c].push_back(e);
  }

  world.own_cumulative.resize(g);
  world.foreign_cumulative.resize(g);
  std::vector<double> own_total(g, 0.0), foreign_total(g, 0.0);
  for (std::size_t c = 0; c < g; ++c) {
    std::vector<double> own, foreign;
    for (std::size_t e : world.community_members[c]) {
      own.push_back(world.entity_popularity[e]);
      foreign.push_back(world.entity_popularity[e] * world.entity_appeal[e]);
      own_total[c] += own.back();
      foreign_total[c] += foreign.back();
    }
    world.own_cumulative[c] = cumulative(own);
    world.foreign_cumulative[c] = cumulative(foreign);
  }

  // Expected per-user draw rate of e by each community, then the (R - D)
  // share of e's audience.
  const double eps = config.mixing;
  const std::size_t r_comm = config.republican_community;
  const std::size_t d_comm = config.democratic_community;
  for (std::size_t e = 0; e < n_e; ++e) {
    const std::size_t c = world.entity_community[e];
    const double own_rate = (1.0 - eps) * world.entity_popularity[e] / own_total[c];
    const double foreign_rate = eps / static_cast<double>(g - 1) *
                                world.entity_popularity[e] *
                                world.entity_appeal[e] / foreign_total[c];
    const double rate_r = c == r_comm ? own_rate : foreign_rate;
    const double rate_d = c == d_comm ? own_rate : foreign_rate;
    const double total = own_rate + static_cast<double>(g - 1) * foreign_rate;
    world.entity_polarity_intensity[e] = (rate_r - rate_d) / total;
  }

  world.anchor_republican = world.community_members[r_comm].front();
  world.anchor_democratic = world.community_members[d_comm].front();

  const std::size_t n_u = config.n_users;
  world.user_ids.resize(n_u);
  world.user_community.resize(n_u);
  world.user_attribute.resize(n_u);
  std::uniform_int_distribution<std::size_t> pick_community(0, g - 1);
  for (std::size_t u = 0; u < n_u; ++u) {
    world.user_ids[u] = padded_id('u', u, n_u);
    const std::size_t c = pick_community(rng);
    world.user_community[u] = c;
    int attribute = static_cast<int>(c % 2);
    if (uniform01(rng) < config.attribute_noise) attribute = 1 - attribute;
    world.user_attribute[u] = attribute;
  }
  return world;
}

std::size_t draw_followee(const SyntheticWorld& world, std::size_t community,
                          double mixing, RandomEngine& rng) {
  const std::size_t g = world.n_communities();
  if (uniform01(rng) < mixing) {
    std::uniform_int_distribution<std::size_t> pick(0, g - 2);
    std::size_t foreign = pick(rng);
    if (foreign >= community) ++foreign;
    return world.community_members[foreign][draw_from(
        world.foreign_cumulative[foreign], rng)];
  }
  return world.community_members[community][draw_from(
      world.own_cumulative[community], rng)];
}

std::vector<std::size_t> sample_follows(const SyntheticWorld& world,
                                        std::size_t user,
                                        const SynthConfig& config,
                                        RandomEngine& rng) {
  std::poisson_distribution<std::size_t> size_dist(config.follows_mean);
  const std::size_t n_draws =
      std::clamp<std::size_t>(size_dist(rng), 2, world.entity_ids.size());
  std::vector<std::size_t> follows;
  follows.reserve(n_draws);
  const std::size_t community = world.user_community[user];
  for (std::size_t i = 0; i < n_draws; ++i)
    follows.push_back(draw_followee(world, community, config.mixing, rng));
  std::sort(follows.begin(), follows.end());
  follows.erase(std::unique(follows.begin(), follows.end()), follows.end());
  return follows;
}

std::vector<FollowRecord> sample_corpus(const SyntheticWorld& world,
                                        const SynthConfig& config) {
  RandomEngine rng(derive_seed(config.seed, 0xF011));
  std::vector<FollowRecord> records;
  records.reserve(world.user_ids.size());
  for (std::size_t u = 0; u < world.user_ids.size(); ++u) {
    FollowRecord r;
    r.user_id = world.user_ids[u];
    for (std::size_t e : sample_follows(world, u, config, rng))
      r.followees.push_back(world.entity_ids[e]);
    records.push_back(std::move(r));
  }
  return records;
}

SynthPaths SynthPaths::in_directory(const std::string& dir) {
  const std::filesystem::path base(dir);
  return {(base / "follows.tsv").string(), (base / "labels.tsv").string(),
          (base / "gold.tsv").string(), (base / "anchors.tsv").string(),
          (base / "targets.txt").string()};
}

void emit_corpus(const SyntheticWorld& world,
                 std::span<const FollowRecord> records,
                 const SynthPaths& paths) {
  {
    auto out = internal::open_output(paths.follows);
    write_follow_records(out, records);
    internal::finish_output(out, paths.follows);
  }
  {
    auto out = internal::open_output(paths.labels);
    for (std::size_t u = 0; u < world.user_ids.size(); ++u)
      out << world.user_ids[u] << '\t' << world.user_attribute[u] << '\n';
    internal::finish_output(out, paths.labels);
  }
  {
    auto out = internal::open_output(paths.gold);
    for (std::size_t e = 0; e < world.entity_ids.size(); ++e)
      out << world.entity_ids[e] << '\t'
          << format_value(world.entity_polarity_intensity[e]) << '\n';
    internal::finish_output(out, paths.gold);
  }
  {
    auto out = internal::open_output(paths.anchors);
    write_anchors(out, world.anchors());
    internal::finish_output(out, paths.anchors);
  }
  {
    auto out = internal::open_output(paths.targets);
    for (std::size_t e = 0; e < world.entity_ids.size(); ++e) {
      if (e == world.anchor_republican || e == world.anchor_democratic) continue;
      out << world.entity_ids[e] << '\n';
    }
    internal::finish_output(out, paths.targets);
  }
}

}  // namespace cofollow
