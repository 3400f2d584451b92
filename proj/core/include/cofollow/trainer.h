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

#ifndef COFOLLOW_TRAINER_H_
#define COFOLLOW_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "cofollow/corpus.h"
#include "cofollow/random.h"

namespace cofollow {

enum class Variant { kSkipGram, kCbow };

std::string_view variant_name(Variant variant);
Variant parse_variant(std::string_view name);

// Learning hyperparameters. Defaults are the full-scale Twitter settings.
struct TrainConfig {
  std::size_t dim = 100;
  std::size_t negatives = 20;
  // Context radius in the shuffled retained order of a user's set. Sets
  // never exceed max_follows, so the default covers every co-followed entity.
  std::size_t window = 1000;
  // Subsampling threshold; +inf keeps every occurrence.
  double subsample = 1e-5;
  double lr_initial = 0.03;
  double lr_min = 7e-5;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  Variant variant = Variant::kSkipGram;
  double negative_power = 0.75;

  // Throws DomainError on an invalid combination.
  void validate() const;
};

// Target (u) and context (v) tables, row-major |E| x d.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(std::size_t vocab_size, std::size_t dim);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }

  std::span<double> target(std::size_t i) {
    return {target_.data() + i * dim_, dim_};
  }
  std::span<const double> target(std::size_t i) const {
    return {target_.data() + i * dim_, dim_};
  }
  std::span<double> context(std::size_t i) {
    return {context_.data() + i * dim_, dim_};
  }
  std::span<const double> context(std::size_t i) const {
    return {context_.data() + i * dim_, dim_};
  }

  std::vector<double>& target_table() { return target_; }
  const std::vector<double>& target_table() const { return target_; }
  std::vector<double>& context_table() { return context_; }
  const std::vector<double>& context_table() const { return context_; }

  bool all_finite() const;

  bool operator==(const EmbeddingModel&) const = default;

 private:
  std::size_t vocab_size_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> target_;
  std::vector<double> context_;
};

// Targets i.i.d. uniform in [-0.5/d, 0.5/d]; contexts zero.
EmbeddingModel init_model(std::size_t vocab_size, std::size_t dim,
                          std::uint64_t seed);

// Noise distribution P(i) proportional to count_i^power. Read-only once
// built; callers bring their own random stream.
class NegativeSampler {
 public:
  NegativeSampler(std::span<const std::uint64_t> counts, double power = 0.75);

  std::size_t size() const { return probabilities_.size(); }
  double probability(std::size_t i) const { return probabilities_[i]; }
  const std::vector<double>& probabilities() const { return probabilities_; }

  std::uint32_t sample(RandomEngine& rng) const;

  // Appends `n` draws to `out`, redrawing any that hit `exclude`. Draws
  // nothing when `exclude` covers the whole vocabulary.
  void sample_excluding(RandomEngine& rng, std::size_t n,
                        std::span<const std::uint32_t> exclude,
                        std::vector<std::uint32_t>& out) const;

 private:
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

NegativeSampler build_negative_table(std::span<const std::uint64_t> counts,
                                     double power = 0.75);

// One SGD step on -log s(u_f.v_c) - sum_k log s(-u_f.v_k). Every gradient is
// taken at the pre-update parameters. Returns the pre-update loss.
double sgns_pair_update(EmbeddingModel& model, std::uint32_t focus,
                        std::uint32_t context,
                        std::span<const std::uint32_t> negatives, double lr);

// CBOW step: h is the mean of the context vectors over `context_set`, scored
// against target vectors of the focus and negatives. Each context vector
// receives 1/|C| of the gradient on h. Returns the pre-update loss.
double cbow_update(EmbeddingModel& model,
                   std::span<const std::uint32_t> context_set,
                   std::uint32_t focus,
                   std::span<const std::uint32_t> negatives, double lr);

// Linear decay from lr_initial (progress 0) to lr_min (progress 1).
double lr_schedule(double progress, const TrainConfig& config);

struct TrainStats {
  std::size_t epoch = 0;
  std::uint64_t pairs_processed = 0;
  double mean_loss = 0.0;
  double wall_seconds = 0.0;
};

// One pass over every user set. Occurrences are subsampled and the retained
// set shuffled under (seed, worker, epoch); learning rate follows the global
// token progress epoch_index * total_tokens + tokens seen so far.
TrainStats train_epoch(EmbeddingModel& model, const ContextCorpus& corpus,
                       const NegativeSampler& sampler,
                       const TrainConfig& config, std::size_t epoch_index);

struct TrainResult {
  EmbeddingModel model;
  std::vector<TrainStats> stats;
};

using EpochCallback = std::function<void(const TrainStats&)>;

// Full run: init_model, build_negative_table over vocabulary counts, then
// config.epochs passes. The published embeddings are the target vectors.
TrainResult train(const ContextCorpus& corpus, const Vocabulary& vocab,
                  const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// `epoch	pairs	mean_loss	seconds`, one line per call.
void write_train_stats(std::ostream& out, const TrainStats& stats);

}  // namespace cofollow

#endif  // COFOLLOW_TRAINER_H_
