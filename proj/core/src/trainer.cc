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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <thread>

#include "cofollow/error.h"

namespace cofollow {

std::string_view variant_name(Variant variant) {
  return variant == Variant::kCbow ? "cbow" : "skipgram";
}

Variant parse_variant(std::string_view name) {
  if (name == "skipgram") return Variant::kSkipGram;
  if (name == "cbow") return Variant::kCbow;
  throw DomainError("unknown variant '" + std::string(name) +
                    "' (expected skipgram or cbow)");
}

void TrainConfig::validate() const {
  if (dim < 1) throw DomainError("dim must be >= 1");
  if (negatives < 1) throw DomainError("negatives must be >= 1");
  if (window < 1) throw DomainError("window must be >= 1");
  if (!(subsample > 0.0)) throw DomainError("subsample must be > 0");
  if (!(lr_initial > 0.0) || !std::isfinite(lr_initial))
    throw DomainError("lr_initial must be finite and > 0");
  if (!(lr_min > 0.0)) throw DomainError("lr_min must be > 0");
  if (!(lr_min < lr_initial)) throw DomainError("lr_min must be < lr_initial");
  if (epochs < 1) throw DomainError("epochs must be >= 1");
  if (workers < 1) throw DomainError("workers must be >= 1");
  if (!(negative_power >= 0.0) || !std::isfinite(negative_power))
    throw DomainError("negative_power must be finite and >= 0");
}

EmbeddingModel::EmbeddingModel(std::size_t vocab_size, std::size_t dim)
    : vocab_size_(vocab_size),
      dim_(dim),
      target_(vocab_size * dim, 0.0),
      context_(vocab_size * dim, 0.0) {}

bool EmbeddingModel::all_finite() const {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(target_.begin(), target_.end(), finite) &&
         std::all_of(context_.begin(), context_.end(), finite);
}

EmbeddingModel init_model(std::size_t vocab_size, std::size_t dim,
                          std::uint64_t seed) {
  if (vocab_size < 1) throw DomainError("vocabulary is empty");
  if (dim < 1) throw DomainError("dim must be >= 1");
  EmbeddingModel model(vocab_size, dim);
  RandomEngine rng(derive_seed(seed, 0x1417));
  const double scale = 1.0 / static_cast<double>(dim);
  for (double& x : model.target_table()) x = (uniform01(rng) - 0.5) * scale;
  return model;
}

NegativeSampler::NegativeSampler(std::span<const std::uint64_t> counts,
                                 double power) {
  if (counts.empty()) throw DomainError("negative table over empty vocabulary");
  probabilities_.reserve(counts.size());
  double total = 0.0;
  for (std::uint64_t c : counts) {
    if (c == 0) throw DomainError("negative table needs counts >= 1");
    const double w = std::pow(static_cast<double>(c), power);
    probabilities_.push_back(w);
    total += w;
  }
  cumulative_.reserve(counts.size());
  double running = 0.0;
  for (double& p : probabilities_) {
    p /= total;
    running += p;
    cumulative_.push_back(running);
  }
  cumulative_.back() = 1.0;
}

std::uint32_t NegativeSampler::sample(RandomEngine& rng) const {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
  if (idx >= cumulative_.size()) idx = cumulative_.size() - 1;
  return static_cast<std::uint32_t>(idx);
}

void NegativeSampler::sample_excluding(RandomEngine& rng, std::size_t n,
                                       std::span<const std::uint32_t> exclude,
                                       std::vector<std::uint32_t>& out) const {
  auto excluded = [&](std::uint32_t k) {
    return std::find(exclude.begin(), exclude.end(), k) != exclude.end();
  };
  std::size_t distinct_excluded = 0;
  for (std::size_t i = 0; i < exclude.size(); ++i) {
    if (exclude[i] >= size()) continue;
    if (std::find(exclude.begin(), exclude.begin() + i, exclude[i]) ==
        exclude.begin() + i)
      ++distinct_excluded;
  }
  if (distinct_excluded >= size()) return;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t k;
    do {
      k = sample(rng);
    } while (excluded(k));
    out.push_back(k);
  }
}

NegativeSampler build_negative_table(std::span<const std::uint64_t> counts,
                                     double power) {
  return NegativeSampler(counts, power);
}

namespace {

// Shared-table accessors. Multi-worker training updates rows without locks;
// relaxed atomic loads and stores make torn and lost updates well-defined.
template <bool kShared>
inline double load(const double& x) {
  if constexpr (kShared) {
    return std::atomic_ref<double>(const_cast<double&>(x))
        .load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool kShared>
inline void add(double& x, double delta) {
  if constexpr (kShared) {
    std::atomic_ref<double> ref(x);
    ref.store(ref.load(std::memory_order_relaxed) + delta,
              std::memory_order_relaxed);
  } else {
    x += delta;
  }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^z) without overflow.
inline double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

struct Workspace {
  std::vector<double> grad;    // accumulated step for the shared side
  std::vector<double> coef;    // -dLoss/dx per output row
  std::vector<double> hidden;  // CBOW mean context
  std::vector<std::uint32_t> negatives;
  std::vector<std::uint32_t> retained;
  std::vector<std::uint32_t> context_set;
};

// Rows: `positive` then `negatives`, all from `out_table`. `in_row` is the
// input vector (u_focus for skip-gram, h for CBOW). Fills ws.coef and
// ws.grad = sum_r coef_r * out_r, all at pre-update values; returns loss.
template <bool kShared>
double score_rows(const double* in_row, double* out_table, std::size_t dim,
                  std::uint32_t positive,
                  std::span<const std::uint32_t> negatives, Workspace& ws) {
  const std::size_t n_rows = negatives.size() + 1;
  ws.coef.resize(n_rows);
  double loss = 0.0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::uint32_t row = r == 0 ? positive : negatives[r - 1];
    const double* v = out_table + static_cast<std::size_t>(row) * dim;
    double x = 0.0;
    for (std::size_t k = 0; k < dim; ++k) x += in_row[k] * load<kShared>(v[k]);
    if (r == 0) {
      loss += softplus(-x);
      ws.coef[r] = 1.0 - sigmoid(x);
    } else {
      loss += softplus(x);
      ws.coef[r] = -sigmoid(x);
    }
  }
  ws.grad.assign(dim, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::uint32_t row = r == 0 ? positive : negatives[r - 1];
    const double* v = out_table + static_cast<std::size_t>(row) * dim;
    const double g = ws.coef[r];
    for (std::size_t k = 0; k < dim; ++k) ws.grad[k] += g * load<kShared>(v[k]);
  }
  return loss;
}

// out_r += lr * coef_r * in_row for every output row.
template <bool kShared>
void apply_output_step(const double* in_row, double* out_table,
                       std::size_t dim, std::uint32_t positive,
                       std::span<const std::uint32_t> negatives, double lr,
                       const Workspace& ws) {
  const std::size_t n_rows = negatives.size() + 1;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::uint32_t row = r == 0 ? positive : negatives[r - 1];
    double* v = out_table + static_cast<std::size_t>(row) * dim;
    const double step = lr * ws.coef[r];
    for (std::size_t k = 0; k < dim; ++k) add<kShared>(v[k], step * in_row[k]);
  }
}

template <bool kShared>
double sgns_kernel(EmbeddingModel& model, std::uint32_t focus,
                   std::uint32_t context,
                   std::span<const std::uint32_t> negatives, double lr,
                   Workspace& ws) {
  const std::size_t dim = model.dim();
  double* u = model.target_table().data() + static_cast<std::size_t>(focus) * dim;
  ws.hidden.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) ws.hidden[k] = load<kShared>(u[k]);
  const double loss = score_rows<kShared>(ws.hidden.data(),
                                          model.context_table().data(), dim,
                                          context, negatives, ws);
  apply_output_step<kShared>(ws.hidden.data(), model.context_table().data(),
                             dim, context, negatives, lr, ws);
  for (std::size_t k = 0; k < dim; ++k) add<kShared>(u[k], lr * ws.grad[k]);
  return loss;
}

template <bool kShared>
double cbow_kernel(EmbeddingModel& model,
                   std::span<const std::uint32_t> context_set,
                   std::uint32_t focus,
                   std::span<const std::uint32_t> negatives, double lr,
                   Workspace& ws) {
  const std::size_t dim = model.dim();
  double* ctx = model.context_table().data();
  ws.hidden.assign(dim, 0.0);
  for (std::uint32_t c : context_set) {
    const double* v = ctx + static_cast<std::size_t>(c) * dim;
    for (std::size_t k = 0; k < dim; ++k) ws.hidden[k] += load<kShared>(v[k]);
  }
  const double inv = 1.0 / static_cast<double>(context_set.size());
  for (double& h : ws.hidden) h *= inv;

  const double loss = score_rows<kShared>(ws.hidden.data(),
                                          model.target_table().data(), dim,
                                          focus, negatives, ws);
  apply_output_step<kShared>(ws.hidden.data(), model.target_table().data(),
                             dim, focus, negatives, lr, ws);
  const double scale = lr * inv;
  for (std::uint32_t c : context_set) {
    double* v = ctx + static_cast<std::size_t>(c) * dim;
    for (std::size_t k = 0; k < dim; ++k) add<kShared>(v[k], scale * ws.grad[k]);
  }
  return loss;
}

void check_index(const EmbeddingModel& model, std::uint32_t idx,
                 const char* role) {
  if (idx >= model.vocab_size())
    throw LookupError(std::string(role) + " index " + std::to_string(idx) +
                      " out of range for vocabulary of " +
                      std::to_string(model.vocab_size()));
}

void check_lr(double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr))
    throw DomainError("learning rate must be finite and > 0");
}

struct WorkerTotals {
  std::uint64_t pairs = 0;
  double loss = 0.0;
};

template <bool kShared>
WorkerTotals run_worker(EmbeddingModel& model, const ContextCorpus& corpus,
                        std::span<const std::size_t> order,
                        std::span<const double> keep,
                        const NegativeSampler& sampler,
                        const TrainConfig& config, std::size_t epoch_index,
                        std::size_t worker,
                        std::atomic<std::uint64_t>& tokens_done) {
  RandomEngine rng(derive_seed(config.seed, worker + 1, epoch_index));
  Workspace ws;
  WorkerTotals totals;
  const double budget = static_cast<double>(config.epochs) *
                        static_cast<double>(corpus.total_tokens);
  const double epoch_base = static_cast<double>(epoch_index) *
                            static_cast<double>(corpus.total_tokens);
  const std::size_t window = config.window;

  for (std::size_t user : order) {
    const std::vector<std::uint32_t>& set = corpus.user_sets[user];
    const double done =
        static_cast<double>(tokens_done.load(std::memory_order_relaxed));
    const double lr = lr_schedule((epoch_base + done) / budget, config);

    ws.retained.clear();
    for (std::uint32_t idx : set) {
      const double p = keep[idx];
      if (p >= 1.0 || uniform01(rng) < p) ws.retained.push_back(idx);
    }
    std::shuffle(ws.retained.begin(), ws.retained.end(), rng);
    const std::size_t n = ws.retained.size();

    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t lo = a > window ? a - window : 0;
      const std::size_t hi = std::min(n - 1, a + window);
      const std::uint32_t focus = ws.retained[a];
      if (config.variant == Variant::kSkipGram) {
        for (std::size_t b = lo; b <= hi; ++b) {
          if (b == a) continue;
          const std::uint32_t context = ws.retained[b];
          const std::uint32_t exclude[2] = {focus, context};
          ws.negatives.clear();
          sampler.sample_excluding(rng, config.negatives, exclude,
                                   ws.negatives);
          totals.loss += sgns_kernel<kShared>(model, focus, context,
                                              ws.negatives, lr, ws);
          ++totals.pairs;
        }
      } else {
        ws.context_set.clear();
        for (std::size_t b = lo; b <= hi; ++b)
          if (b != a) ws.context_set.push_back(ws.retained[b]);
        if (ws.context_set.empty()) continue;
        const std::uint32_t exclude[1] = {focus};
        ws.negatives.clear();
        sampler.sample_excluding(rng, config.negatives, exclude, ws.negatives);
        totals.loss += cbow_kernel<kShared>(model, ws.context_set, focus,
                                            ws.negatives, lr, ws);
        ++totals.pairs;
      }
    }
    tokens_done.fetch_add(set.size(), std::memory_order_relaxed);
  }
  return totals;
}

}  // namespace

double sgns_pair_update(EmbeddingModel& model, std::uint32_t focus,
                        std::uint32_t context,
                        std::span<const std::uint32_t> negatives, double lr) {
  check_index(model, focus, "focus");
  check_index(model, context, "context");
  for (std::uint32_t k : negatives) check_index(model, k, "negative");
  if (focus == context) throw DomainError("focus and context must differ");
  check_lr(lr);
  Workspace ws;
  return sgns_kernel<false>(model, focus, context, negatives, lr, ws);
}

double cbow_update(EmbeddingModel& model,
                   std::span<const std::uint32_t> context_set,
                   std::uint32_t focus,
                   std::span<const std::uint32_t> negatives, double lr) {
  if (context_set.empty()) throw DomainError("CBOW context set is empty");
  check_index(model, focus, "focus");
  for (std::uint32_t c : context_set) {
    check_index(model, c, "context");
    if (c == focus) throw DomainError("focus must not be in the context set");
  }
  for (std::uint32_t k : negatives) check_index(model, k, "negative");
  check_lr(lr);
  Workspace ws;
  return cbow_kernel<false>(model, context_set, focus, negatives, lr, ws);
}

double lr_schedule(double progress, const TrainConfig& config) {
  const double p = std::clamp(progress, 0.0, 1.0);
  return std::lerp(config.lr_initial, config.lr_min, p);
}

TrainStats train_epoch(EmbeddingModel& model, const ContextCorpus& corpus,
                       const NegativeSampler& sampler,
                       const TrainConfig& config, std::size_t epoch_index) {
  config.validate();
  if (model.dim() != config.dim)
    throw DomainError("model dimension " + std::to_string(model.dim()) +
                      " does not match config dim " +
                      std::to_string(config.dim));
  if (sampler.size() != model.vocab_size())
    throw LookupError("negative table size does not match the model");
  if (corpus.entity_counts.size() != model.vocab_size())
    throw LookupError("corpus was encoded against a different vocabulary");
  for (const auto& set : corpus.user_sets)
    for (std::uint32_t idx : set) check_index(model, idx, "corpus");

  const auto start = std::chrono::steady_clock::now();
  TrainStats stats;
  stats.epoch = epoch_index + 1;

  std::vector<double> keep(model.vocab_size(), 1.0);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const std::uint64_t c = corpus.entity_counts[i];
    if (c > 0)
      keep[i] = keep_probability(static_cast<double>(c) /
                                     static_cast<double>(corpus.total_tokens),
                                 config.subsample);
  }

  std::vector<std::size_t> order(corpus.user_sets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RandomEngine order_rng(derive_seed(config.seed, 0, epoch_index));
  std::shuffle(order.begin(), order.end(), order_rng);

  std::atomic<std::uint64_t> tokens_done{0};
  const std::size_t workers = std::min(config.workers,
                                       std::max<std::size_t>(order.size(), 1));
  std::vector<WorkerTotals> totals(workers);
  if (workers == 1) {
    totals[0] = run_worker<false>(model, corpus, order, keep, sampler, config,
                                  epoch_index, 0, tokens_done);
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (order.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(order.size(), w * chunk);
      const std::size_t end = std::min(order.size(), begin + chunk);
      std::span<const std::size_t> part(order.data() + begin, end - begin);
      threads.emplace_back([&, part, w] {
        totals[w] = run_worker<true>(model, corpus, part, keep, sampler, config,
                                     epoch_index, w, tokens_done);
      });
    }
  }

  double loss = 0.0;
  for (const WorkerTotals& t : totals) {
    stats.pairs_processed += t.pairs;
    loss += t.loss;
  }
  stats.mean_loss =
      stats.pairs_processed > 0 ? loss / static_cast<double>(stats.pairs_processed)
                                : 0.0;
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return stats;
}

TrainResult train(const ContextCorpus& corpus, const Vocabulary& vocab,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (vocab.empty()) throw DomainError("vocabulary is empty");
  TrainResult result;
  result.model = init_model(vocab.size(), config.dim, config.seed);
  const auto counts = vocab.counts();
  const NegativeSampler sampler(counts, config.negative_power);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    TrainStats stats = train_epoch(result.model, corpus, sampler, config, epoch);
    if (on_epoch) on_epoch(stats);
    result.stats.push_back(stats);
  }
  return result;
}

void write_train_stats(std::ostream& out, const TrainStats& stats) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%zu\t%llu\t%.9g\t%.3f\n", stats.epoch,
                static_cast<unsigned long long>(stats.pairs_processed),
                stats.mean_loss, stats.wall_seconds);
  out << buf;
}

}  // namespace cofollow
