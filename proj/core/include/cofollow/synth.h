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

#ifndef COFOLLOW_SYNTH_H_
#define COFOLLOW_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cofollow/corpus.h"
#include "cofollow/polarity.h"
#include "cofollow/random.h"

namespace cofollow {

// Planted-partition world with Zipf popularity inside each community.
struct SynthConfig {
  std::size_t n_entities = 200;
  std::size_t n_users = 5000;
  std::size_t n_communities = 2;
  double follows_mean = 30.0;
  // Probability that one follow is drawn from a foreign community.
  double mixing = 0.1;
  double zipf_exponent = 1.0;
  std::size_t republican_community = 0;
  std::size_t democratic_community = 1;
  // Probability of flipping the community-parity attribute.
  double attribute_noise = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticWorld {
  std::vector<std::string> entity_ids;
  std::vector<std::size_t> entity_community;
  // Zipf weight 1/rank^s inside the entity's community.
  std::vector<double> entity_popularity;
  // Per-entity draw in (0, 1] scaling how often foreign users pick it.
  std::vector<double> entity_appeal;
  // Expected (R - D) share of the entity's audience, in [-1, 1].
  std::vector<double> entity_polarity_intensity;

  std::vector<std::string> user_ids;
  std::vector<std::size_t> user_community;
  std::vector<int> user_attribute;

  std::size_t anchor_republican = 0;
  std::size_t anchor_democratic = 0;

  // Entity indices of each community, in popularity-rank order.
  std::vector<std::vector<std::size_t>> community_members;
  // Cumulative draw tables per community: own-community and foreign draws.
  std::vector<std::vector<double>> own_cumulative;
  std::vector<std::vector<double>> foreign_cumulative;

  std::size_t n_communities() const { return community_members.size(); }
  Anchors anchors() const {
    return {entity_ids[anchor_republican], entity_ids[anchor_democratic]};
  }
};

SyntheticWorld generate_world(const SynthConfig& config);

// One follow draw for a user of `community`.
std::size_t draw_followee(const SyntheticWorld& world, std::size_t community,
                          double mixing, RandomEngine& rng);

// Poisson(m) draws clipped to [2, n_entities], collapsed to a sorted set.
std::vector<std::size_t> sample_follows(const SyntheticWorld& world,
                                        std::size_t user,
                                        const SynthConfig& config,
                                        RandomEngine& rng);

// Follow records for every user, deterministic under config.seed.
std::vector<FollowRecord> sample_corpus(const SyntheticWorld& world,
                                        const SynthConfig& config);

struct SynthPaths {
  std::string follows;
  std::string labels;
  std::string gold;
  std::string anchors;
  std::string targets;

  static SynthPaths in_directory(const std::string& dir);
};

// Writes follow records, `user	label` attributes, `entity	intensity`
// gold, the anchors file and a targets list of every non-anchor entity.
void emit_corpus(const SyntheticWorld& world,
                 std::span<const FollowRecord> records,
                 const SynthPaths& paths);

}  // namespace cofollow

#endif  // COFOLLOW_SYNTH_H_
