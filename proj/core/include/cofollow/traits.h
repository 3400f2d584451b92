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

#ifndef COFOLLOW_TRAITS_H_
#define COFOLLOW_TRAITS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cofollow/corpus.h"
#include "cofollow/embedding_store.h"

namespace cofollow {

struct LabeledUser {
  std::string user_id;
  std::vector<std::string> followed_entities;
  int label = 0;
};

// Reads `user_id<TAB>label` rows, label in {0, 1}.
std::vector<std::pair<std::string, int>> parse_labels(
    std::istream& in, std::string_view source = "<input>");
std::vector<std::pair<std::string, int>> read_labels(const std::string& path);

// Every labeled user, in label-file order. Users absent from `records`
// follow nothing and are later excluded by evaluate_attribute.
std::vector<LabeledUser> join_labels(
    std::span<const FollowRecord> records,
    std::span<const std::pair<std::string, int>> labels);

// Mean of the embeddings of the followed entities present in the store.
// Throws DomainError when none are present.
std::vector<double> user_vector(std::span<const std::string> followed_entities,
                                const EmbeddingStore& store);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-class shuffle under `seed` and cut at floor(train_fraction * n_class),
// kept within [1, n_class - 1]. Returns indices into `labels`.
Split split_stratified(std::span<const int> labels, double train_fraction,
                       std::uint64_t seed);

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
};

struct LogRegOptions {
  std::size_t epochs = 100;
  double lr = 0.05;
  std::uint64_t seed = 1;
};

// Plain per-example SGD on mean binary cross-entropy from zero init.
LogRegModel train_logreg(std::span<const std::vector<double>> features,
                         std::span<const int> labels,
                         const LogRegOptions& options = {});

double predict_proba(const LogRegModel& model, std::span<const double> x);

// Mann-Whitney form of ROC AUC; ties count one half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct PmiEntry {
  std::string entity_id;
  double pmi = 0.0;
  std::uint64_t class_followers = 0;
};

// PMI of following each entity with membership in `class_value`, over the
// empirical fractions of `users`. `vocab`, when given, restricts candidates.
std::vector<PmiEntry> pmi_top_accounts(std::span<const LabeledUser> users,
                                       const Vocabulary* vocab,
                                       int class_value,
                                       std::uint64_t min_count,
                                       std::size_t top_k);

struct AttributeReport {
  double auc = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_excluded = 0;
};

// user_vector -> split_stratified -> train_logreg -> roc_auc on the test
// side. Users without a representable entity are excluded and counted.
AttributeReport evaluate_attribute(std::span<const LabeledUser> users,
                                   const EmbeddingStore& store,
                                   std::uint64_t split_seed,
                                   const LogRegOptions& options = {},
                                   double train_fraction = 0.8);

void write_attribute_report_header(std::ostream& out);
void write_attribute_report(std::ostream& out, std::string_view attribute,
                            const AttributeReport& report);

}  // namespace cofollow

#endif  // COFOLLOW_TRAITS_H_
