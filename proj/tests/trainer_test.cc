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

#include "cofollow/trainer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cofollow/error.h"
#include "cofollow/synth.h"
#include "gradient_oracle.h"

namespace cofollow {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using oracle::random_model;
using oracle::sgns_objective;

TEST(SgnsPairUpdate, GradientMatchesFiniteDifferences) {
  RandomEngine rng(101);
  for (int trial = 0; trial < 25; ++trial)
    EXPECT_LT(oracle::sgns_gradient_error(oracle::random_gradient_case(rng)), 1e-5)
        << "trial " << trial;
}

TEST(CbowUpdate, GradientMatchesFiniteDifferences) {
  RandomEngine rng(202);
  for (int trial = 0; trial < 25; ++trial)
    EXPECT_LT(oracle::cbow_gradient_error(oracle::random_gradient_case(rng)), 1e-5)
        << "trial " << trial;
}

TEST(SgnsPairUpdate, ZeroModelLossIsNPlusOneLog2AndStepKeepsFocusZero) {
  for (std::size_t n_neg : {0u, 1u, 5u, 20u}) {
    EmbeddingModel m(30, 8);
    std::vector<std::uint32_t> negatives(n_neg);
    std::iota(negatives.begin(), negatives.end(), 2u);
    const double loss = sgns_pair_update(m, 0, 1, negatives, 0.1);
    EXPECT_NEAR(loss, (n_neg + 1) * std::log(2.0), 1e-12);
    for (double x : m.target(0)) EXPECT_EQ(x, 0.0);
  }
}

TEST(CbowUpdate, ZeroModelLossIsNPlusOneLog2) {
  EmbeddingModel m(30, 8);
  const std::vector<std::uint32_t> ctx = {1, 2, 3};
  const std::vector<std::uint32_t> negatives = {4, 5, 6, 7};
  EXPECT_NEAR(cbow_update(m, ctx, 0, negatives, 0.1), 5 * std::log(2.0), 1e-12);
}

TEST(CbowUpdate, SingleContextEqualsSgnsWithRolesSwapped) {
  RandomEngine rng(7);
  EmbeddingModel cbow = random_model(10, 6, rng);
  EmbeddingModel swapped = cbow;
  std::swap(swapped.target_table(), swapped.context_table());
  const std::vector<std::uint32_t> negatives = {3, 4, 5, 3};
  const double a = cbow_update(cbow, std::vector<std::uint32_t>{2}, 7, negatives, 0.05);
  const double b = sgns_pair_update(swapped, 2, 7, negatives, 0.05);
  EXPECT_EQ(a, b);
  std::swap(swapped.target_table(), swapped.context_table());
  EXPECT_EQ(cbow, swapped);
}

TEST(Kernels, LossIsNonNegative) {
  RandomEngine rng(3);
  EmbeddingModel m = random_model(10, 4, rng, 3.0);
  for (int i = 0; i < 100; ++i) {
    const std::vector<std::uint32_t> negatives = {static_cast<std::uint32_t>(i % 8 + 2)};
    EXPECT_GE(sgns_pair_update(m, 0, 1, negatives, 0.01), 0.0);
    EXPECT_GE(cbow_update(m, std::vector<std::uint32_t>{1}, 0, negatives, 0.01), 0.0);
  }
}

TEST(Kernels, RejectBadArguments) {
  EmbeddingModel m(4, 2);
  const std::vector<std::uint32_t> none;
  EXPECT_THROW(sgns_pair_update(m, 4, 0, none, 0.1), LookupError);
  EXPECT_THROW(sgns_pair_update(m, 0, 1, std::vector<std::uint32_t>{9}, 0.1), LookupError);
  EXPECT_THROW(sgns_pair_update(m, 1, 1, none, 0.1), DomainError);
  EXPECT_THROW(sgns_pair_update(m, 0, 1, none, 0.0), DomainError);
  EXPECT_THROW(cbow_update(m, none, 0, none, 0.1), DomainError);
  EXPECT_THROW(cbow_update(m, std::vector<std::uint32_t>{0}, 0, none, 0.1), DomainError);
}

// Relabelling indices by a permutation and applying the same update under
// the relabelled indices gives the permuted model.
TEST(Kernels, EquivariantUnderIndexPermutation) {
  RandomEngine rng(17);
  const std::size_t n = 9, d = 5;
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);
  const EmbeddingModel base = random_model(n, d, rng);
  auto permute = [&](const EmbeddingModel& m) {
    EmbeddingModel p(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(m.target(i).begin(), m.target(i).end(), p.target(perm[i]).begin());
      std::copy(m.context(i).begin(), m.context(i).end(), p.context(perm[i]).begin());
    }
    return p;
  };
  auto map = [&](std::vector<std::uint32_t> v) {
    for (auto& x : v) x = perm[x];
    return v;
  };

  EmbeddingModel a = base;
  EmbeddingModel b = permute(base);
  const std::vector<std::uint32_t> negatives = {4, 6, 6, 8};
  sgns_pair_update(a, 1, 2, negatives, 0.2);
  sgns_pair_update(b, perm[1], perm[2], map(negatives), 0.2);
  EXPECT_EQ(permute(a), b);

  const std::vector<std::uint32_t> ctx = {0, 3, 5};
  cbow_update(a, ctx, 7, negatives, 0.2);
  cbow_update(b, map(ctx), perm[7], map(negatives), 0.2);
  EXPECT_EQ(permute(a), b);
}

TEST(InitModel, RangeZeroContextsAndDeterminism) {
  const EmbeddingModel m = init_model(50, 4, 9);
  for (double x : m.target_table()) EXPECT_LE(std::abs(x), 0.125);
  for (double x : m.context_table()) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(m, init_model(50, 4, 9));
  EXPECT_NE(m, init_model(50, 4, 10));
  EXPECT_THROW(init_model(0, 4, 1), DomainError);
}

TEST(NegativeSampler, Probabilities) {
  const std::vector<std::uint64_t> one = {42};
  EXPECT_EQ(build_negative_table(one).probability(0), 1.0);

  const std::vector<std::uint64_t> equal = {5, 5, 5, 5};
  const auto uniform = build_negative_table(equal);
  for (double p : uniform.probabilities()) EXPECT_DOUBLE_EQ(p, 0.25);

  const std::vector<std::uint64_t> skew = {8, 1};
  const auto sampler = build_negative_table(skew, 0.75);
  EXPECT_NEAR(sampler.probability(0), 0.8263, 5e-5);
  EXPECT_NEAR(sampler.probability(1), 0.1737, 5e-5);
  EXPECT_DOUBLE_EQ(sampler.probability(0), std::pow(8.0, 0.75) / (std::pow(8.0, 0.75) + 1));

  EXPECT_THROW(build_negative_table(std::vector<std::uint64_t>{}), DomainError);
}

TEST(NegativeSampler, SingleEntityAlwaysSampled) {
  const std::vector<std::uint64_t> one = {3};
  const auto sampler = build_negative_table(one);
  RandomEngine rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sampler.sample(rng), 0u);
}

TEST(NegativeSampler, ExclusionRedrawsAndFullExclusionDrawsNothing) {
  const std::vector<std::uint64_t> counts = {100, 1, 1};
  const auto sampler = build_negative_table(counts);
  RandomEngine rng(2);
  std::vector<std::uint32_t> out;
  const std::vector<std::uint32_t> exclude = {0, 1};
  sampler.sample_excluding(rng, 50, exclude, out);
  ASSERT_EQ(out.size(), 50u);
  for (auto k : out) EXPECT_EQ(k, 2u);
  out.clear();
  const std::vector<std::uint32_t> all = {2, 0, 1};
  sampler.sample_excluding(rng, 5, all, out);
  EXPECT_TRUE(out.empty());
}

TEST(LrSchedule, EndpointsAndMidpoint) {
  const TrainConfig config;
  EXPECT_EQ(lr_schedule(0.0, config), 0.03);
  EXPECT_EQ(lr_schedule(1.0, config), 7e-5);
  EXPECT_DOUBLE_EQ(lr_schedule(0.5, config), (0.03 + 7e-5) / 2);
  EXPECT_EQ(lr_schedule(-1.0, config), 0.03);
  EXPECT_EQ(lr_schedule(2.0, config), 7e-5);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.subsample = kInf;
  EXPECT_NO_THROW(c.validate());
  for (auto mutate : std::vector<std::function<void(TrainConfig&)>>{
           [](TrainConfig& x) { x.dim = 0; },
           [](TrainConfig& x) { x.negatives = 0; },
           [](TrainConfig& x) { x.subsample = 0; },
           [](TrainConfig& x) { x.lr_min = x.lr_initial; },
           [](TrainConfig& x) { x.epochs = 0; },
           [](TrainConfig& x) { x.workers = 0; }}) {
    TrainConfig bad;
    mutate(bad);
    EXPECT_THROW(bad.validate(), DomainError);
  }
}

TEST(Variant, NamesRoundTrip) {
  EXPECT_EQ(parse_variant(variant_name(Variant::kCbow)), Variant::kCbow);
  EXPECT_EQ(parse_variant(variant_name(Variant::kSkipGram)), Variant::kSkipGram);
  EXPECT_THROW(parse_variant("glove"), DomainError);
}

TrainConfig small_config() {
  TrainConfig c;
  c.dim = 8;
  c.negatives = 3;
  c.subsample = kInf;
  c.epochs = 1;
  return c;
}

TEST(TrainEpoch, EmptyCorpusProcessesNoPairs) {
  const ContextCorpus corpus = make_context_corpus({}, 4);
  const std::vector<std::uint64_t> counts = {1, 1, 1, 1};
  EmbeddingModel m = init_model(4, 8, 1);
  const EmbeddingModel before = m;
  const TrainStats s = train_epoch(m, corpus, build_negative_table(counts), small_config(), 0);
  EXPECT_EQ(s.pairs_processed, 0u);
  EXPECT_EQ(s.epoch, 1u);
  EXPECT_EQ(m, before);
}

TEST(TrainEpoch, OneSetGivesOrderedPairCount) {
  for (std::uint32_t n : {2u, 3u, 7u, 20u}) {
    std::vector<std::uint32_t> set(n);
    std::iota(set.begin(), set.end(), 0u);
    const ContextCorpus corpus = make_context_corpus({set}, 25);
    const std::vector<std::uint64_t> counts(25, 1);
    EmbeddingModel m = init_model(25, 8, 1);
    const TrainStats s =
        train_epoch(m, corpus, build_negative_table(counts), small_config(), 0);
    EXPECT_EQ(s.pairs_processed, static_cast<std::uint64_t>(n) * (n - 1));
  }
}

TEST(TrainEpoch, WindowLimitsPairs) {
  std::vector<std::uint32_t> set(10);
  std::iota(set.begin(), set.end(), 0u);
  const ContextCorpus corpus = make_context_corpus({set}, 10);
  const std::vector<std::uint64_t> counts(10, 1);
  TrainConfig c = small_config();
  c.window = 1;
  EmbeddingModel m = init_model(10, 8, 1);
  EXPECT_EQ(train_epoch(m, corpus, build_negative_table(counts), c, 0).pairs_processed, 18u);
}

TEST(TrainEpoch, CbowMakesOneUpdatePerFocus) {
  const ContextCorpus corpus = make_context_corpus({{0, 1, 2, 3}, {4, 5}}, 6);
  const std::vector<std::uint64_t> counts(6, 1);
  TrainConfig c = small_config();
  c.variant = Variant::kCbow;
  EmbeddingModel m = init_model(6, 8, 1);
  EXPECT_EQ(train_epoch(m, corpus, build_negative_table(counts), c, 0).pairs_processed, 6u);
}

TEST(TrainEpoch, RejectsMismatchedInputs) {
  const ContextCorpus corpus = make_context_corpus({{0, 1}}, 3);
  const std::vector<std::uint64_t> counts(3, 1);
  const auto sampler = build_negative_table(counts);
  EmbeddingModel wrong_dim = init_model(3, 4, 1);
  EXPECT_THROW(train_epoch(wrong_dim, corpus, sampler, small_config(), 0), DomainError);
  EmbeddingModel wrong_size = init_model(5, 8, 1);
  EXPECT_THROW(train_epoch(wrong_size, corpus, sampler, small_config(), 0), LookupError);
}

struct Planted {
  Vocabulary vocab;
  ContextCorpus corpus;
  SyntheticWorld world;
};

Planted planted_corpus() {
  SynthConfig sc;
  sc.n_entities = 60;
  sc.n_users = 800;
  sc.follows_mean = 12;
  sc.seed = 4;
  Planted p;
  p.world = generate_world(sc);
  const auto records = sample_corpus(p.world, sc);
  p.vocab = build_vocabulary(records, 1, 1000);
  p.corpus = encode_contexts(records, p.vocab, 1000);
  return p;
}

TEST(Train, SingleWorkerIsDeterministic) {
  const Planted p = planted_corpus();
  TrainConfig c = small_config();
  c.epochs = 2;
  c.subsample = 1e-2;
  const TrainResult a = train(p.corpus, p.vocab, c);
  const TrainResult b = train(p.corpus, p.vocab, c);
  EXPECT_EQ(a.model, b.model);
  c.seed = 2;
  EXPECT_NE(train(p.corpus, p.vocab, c).model, a.model);
}

TEST(Train, OneEntityVocabularyLeavesInitialization) {
  const std::vector<FollowRecord> records = {{"u1", {"a"}}, {"u2", {"a", "b"}}};
  const Vocabulary vocab = build_vocabulary(records, 2, 1000);
  ASSERT_EQ(vocab.size(), 1u);
  const ContextCorpus corpus = encode_contexts(records, vocab, 1000);
  TrainConfig c = small_config();
  const TrainResult r = train(corpus, vocab, c);
  EXPECT_EQ(r.stats.at(0).pairs_processed, 0u);
  EXPECT_EQ(r.model, init_model(1, c.dim, c.seed));
}

TEST(Train, CbowMeanLossDecreasesOnPlantedWorld) {
  const Planted p = planted_corpus();
  TrainConfig c = small_config();
  c.variant = Variant::kCbow;
  c.dim = 16;
  c.negatives = 5;
  c.epochs = 3;
  const TrainResult r = train(p.corpus, p.vocab, c);
  ASSERT_EQ(r.stats.size(), 3u);
  EXPECT_GT(r.stats[0].mean_loss, r.stats[1].mean_loss);
  EXPECT_GT(r.stats[1].mean_loss, r.stats[2].mean_loss);
}

TEST(Train, SkipGramMeanLossDecreasesAtLowRate) {
  const Planted p = planted_corpus();
  TrainConfig c = small_config();
  c.dim = 16;
  c.negatives = 5;
  c.epochs = 3;
  c.lr_initial = 0.003;
  c.lr_min = 1e-5;
  const TrainResult r = train(p.corpus, p.vocab, c);
  EXPECT_GT(r.stats[0].mean_loss, r.stats[1].mean_loss);
  EXPECT_GT(r.stats[1].mean_loss, r.stats[2].mean_loss);
}

// At the default rate the per-epoch running mean is biased by within-set
// adaptation, so the objective is measured on a fixed sample after each epoch.
TEST(Train, SkipGramFixedSampleObjectiveDecreases) {
  const Planted p = planted_corpus();
  TrainConfig c = small_config();
  c.dim = 16;
  c.negatives = 5;
  c.epochs = 3;

  RandomEngine rng(99);
  const auto sampler = build_negative_table(p.vocab.counts());
  struct Example {
    std::uint32_t focus, context;
    std::vector<std::uint32_t> negatives;
  };
  std::vector<Example> sample;
  for (int i = 0; i < 2000; ++i) {
    const auto& set = p.corpus.user_sets[oracle::pick(rng, p.corpus.user_sets.size())];
    const auto a = oracle::pick(rng, set.size());
    auto b = oracle::pick(rng, set.size() - 1);
    if (b >= a) ++b;
    Example e{set[a], set[b], {}};
    const std::uint32_t exclude[2] = {e.focus, e.context};
    sampler.sample_excluding(rng, c.negatives, exclude, e.negatives);
    sample.push_back(std::move(e));
  }
  auto objective = [&](const EmbeddingModel& m) {
    long double total = 0;
    for (const auto& e : sample) total += sgns_objective(m, e.focus, e.context, e.negatives);
    return static_cast<double>(total / sample.size());
  };

  EmbeddingModel m = init_model(p.vocab.size(), c.dim, c.seed);
  std::vector<double> values = {objective(m)};
  for (std::size_t epoch = 0; epoch < c.epochs; ++epoch) {
    train_epoch(m, p.corpus, sampler, c, epoch);
    values.push_back(objective(m));
  }
  for (std::size_t i = 1; i < values.size(); ++i)
    EXPECT_LT(values[i], values[i - 1]) << "epoch " << i;
}

TEST(Train, MultiWorkerRunStaysFiniteAndCountsPairs) {
  const Planted p = planted_corpus();
  TrainConfig c = small_config();
  c.workers = 4;
  const TrainResult r = train(p.corpus, p.vocab, c);
  EXPECT_TRUE(r.model.all_finite());
  std::uint64_t expected = 0;
  for (const auto& set : p.corpus.user_sets) expected += set.size() * (set.size() - 1);
  EXPECT_EQ(r.stats[0].pairs_processed, expected);
}

TEST(Train, CallbackSeesEveryEpoch) {
  const Planted p = planted_corpus();
  TrainConfig c = small_config();
  c.epochs = 3;
  std::vector<std::size_t> seen;
  train(p.corpus, p.vocab, c, [&](const TrainStats& s) { seen.push_back(s.epoch); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(WriteTrainStats, TabSeparatedLine) {
  std::ostringstream out;
  write_train_stats(out, {2, 1234, 0.5, 1.25});
  EXPECT_EQ(out.str(), "2\t1234\t0.5\t1.250\n");
}

}  // namespace
}  // namespace cofollow
