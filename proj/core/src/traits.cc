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

#include "cofollow/traits.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "cofollow/error.h"
#include "cofollow/random.h"
#include "text_io.h"

namespace cofollow {

std::vector<std::pair<std::string, int>> parse_labels(std::istream& in,
                                                      std::string_view source) {
  const std::string src(source);
  std::vector<std::pair<std::string, int>> labels;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = internal::strip_cr(raw);
    if (internal::is_skippable(line)) continue;
    if (first && line == "user_id\tlabel") {
      first = false;
      continue;
    }
    first = false;
    const auto fields = internal::split_char(line, '\t');
    if (fields.size() != 2 || fields[0].empty())
      throw ParseError(src, line_no, "expected 'user_id<TAB>label'");
    if (fields[1] != "0" && fields[1] != "1")
      throw ParseError(src, line_no, "label must be 0 or 1");
    std::string user(fields[0]);
    if (!seen.insert(user).second)
      throw ParseError(src, line_no, "duplicate user " + user);
    labels.emplace_back(std::move(user), fields[1] == "1" ? 1 : 0);
  }
  return labels;
}

std::vector<std::pair<std::string, int>> read_labels(const std::string& path) {
  auto in = internal::open_input(path);
  return parse_labels(in, path);
}

std::vector<LabeledUser> join_labels(
    std::span<const FollowRecord> records,
    std::span<const std::pair<std::string, int>> labels) {
  std::unordered_map<std::string_view, std::size_t> by_user;
  for (std::size_t i = 0; i < records.size(); ++i)
    by_user.emplace(records[i].user_id, i);
  std::vector<LabeledUser> users;
  users.reserve(labels.size());
  for (const auto& [user, label] : labels) {
    LabeledUser u{user, {}, label};
    if (auto it = by_user.find(user); it != by_user.end())
      u.followed_entities = records[it->second].followees;
    users.push_back(std::move(u));
  }
  return users;
}

std::vector<double> user_vector(std::span<const std::string> followed_entities,
                                const EmbeddingStore& store) {
  std::vector<double> sum(store.dim(), 0.0);
  std::size_t present = 0;
  for (const std::string& id : followed_entities) {
    const auto idx = store.find(id);
    if (!idx) continue;
    const auto v = store.vector(*idx);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += v[k];
    ++present;
  }
  if (present == 0)
    throw DomainError("no followed entity has an embedding");
  const double inv = 1.0 / static_cast<double>(present);
  for (double& x : sum) x *= inv;
  return sum;
}

namespace {

void check_binary(std::span<const int> labels) {
  for (int y : labels)
    if (y != 0 && y != 1) throw DomainError("labels must be 0 or 1");
}

}  // namespace

Split split_stratified(std::span<const int> labels, double train_fraction,
                       std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DomainError("train_fraction must be in (0, 1)");
  check_binary(labels);
  Split split;
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    if (members.size() < 2)
      throw DomainError("class " + std::to_string(cls) +
                        " has fewer than 2 examples");
    RandomEngine rng(derive_seed(seed, 0x5b17, static_cast<std::uint64_t>(cls)));
    std::shuffle(members.begin(), members.end(), rng);
    const auto n = members.size();
    auto cut = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(n)));
    cut = std::clamp<std::size_t>(cut, 1, n - 1);
    split.train.insert(split.train.end(), members.begin(),
                       members.begin() + static_cast<std::ptrdiff_t>(cut));
    split.test.insert(split.test.end(),
                      members.begin() + static_cast<std::ptrdiff_t>(cut),
                      members.end());
  }
  return split;
}

LogRegModel train_logreg(std::span<const std::vector<double>> features,
                         std::span<const int> labels,
                         const LogRegOptions& options) {
  if (features.size() != labels.size())
    throw DomainError("feature and label counts differ");
  if (features.empty()) throw DomainError("no training examples");
  check_binary(labels);
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!has_pos || !has_neg)
    throw DomainError("training data needs both classes");
  const std::size_t dim = features.front().size();
  for (const auto& x : features) {
    if (x.size() != dim) throw DomainError("inconsistent feature dimension");
    for (double v : x)
      if (!std::isfinite(v)) throw DomainError("non-finite feature value");
  }
  if (!(options.lr > 0.0)) throw DomainError("lr must be > 0");

  LogRegModel model{std::vector<double>(dim, 0.0), 0.0};
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  RandomEngine rng(derive_seed(options.seed, 0x10c));
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      const auto& x = features[i];
      const double g = predict_proba(model, x) - labels[i];
      const double step = options.lr * g;
      for (std::size_t k = 0; k < dim; ++k) model.weights[k] -= step * x[k];
      model.bias -= step;
    }
  }
  return model;
}

double predict_proba(const LogRegModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size())
    throw DomainError("feature dimension does not match the model");
  double z = model.bias;
  for (std::size_t k = 0; k < x.size(); ++k) z += model.weights[k] * x[k];
  return 1.0 / (1.0 + std::exp(-z));
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw DomainError("score and label counts differ");
  check_binary(labels);
  for (double s : scores)
    if (std::isnan(s)) throw DomainError("NaN score");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double n_pos = 0.0;
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their mean.
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        positive_rank_sum += mean_rank;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0)
    throw DomainError("ROC AUC needs both classes");
  return (positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::vector<PmiEntry> pmi_top_accounts(std::span<const LabeledUser> users,
                                       const Vocabulary* vocab,
                                       int class_value,
                                       std::uint64_t min_count,
                                       std::size_t top_k) {
  if (min_count < 1) throw DomainError("min_count must be >= 1");
  std::uint64_t n_class = 0;
  struct Counts {
    std::uint64_t all = 0;
    std::uint64_t in_class = 0;
  };
  std::unordered_map<std::string_view, Counts> counts;
  std::unordered_set<std::string_view> seen;
  for (const LabeledUser& u : users) {
    const bool in_class = u.label == class_value;
    if (in_class) ++n_class;
    seen.clear();
    for (const std::string& id : u.followed_entities) {
      if (vocab != nullptr && !vocab->find(id)) continue;
      if (!seen.insert(id).second) continue;
      Counts& c = counts[id];
      ++c.all;
      if (in_class) ++c.in_class;
    }
  }
  if (n_class == 0)
    throw DomainError("class " + std::to_string(class_value) + " has no users");

  const double n = static_cast<double>(users.size());
  std::vector<PmiEntry> out;
  for (const auto& [id, c] : counts) {
    if (c.in_class < min_count) continue;
    // log( P(a,c) / (P(a) P(c)) ) with empirical fractions over n users.
    const double ratio = static_cast<double>(c.in_class) * n /
                         (static_cast<double>(c.all) * static_cast<double>(n_class));
    out.push_back({std::string(id), std::log(ratio), c.in_class});
  }
  std::sort(out.begin(), out.end(), [](const PmiEntry& a, const PmiEntry& b) {
    if (a.pmi != b.pmi) return a.pmi > b.pmi;
    return a.entity_id < b.entity_id;
  });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

AttributeReport evaluate_attribute(std::span<const LabeledUser> users,
                                   const EmbeddingStore& store,
                                   std::uint64_t split_seed,
                                   const LogRegOptions& options,
                                   double train_fraction) {
  AttributeReport report;
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  for (const LabeledUser& u : users) {
    try {
      features.push_back(user_vector(u.followed_entities, store));
      labels.push_back(u.label);
    } catch (const DomainError&) {
      ++report.n_excluded;
    }
  }
  const Split split = split_stratified(labels, train_fraction, split_seed);

  std::vector<std::vector<double>> train_x;
  std::vector<int> train_y;
  for (std::size_t i : split.train) {
    train_x.push_back(features[i]);
    train_y.push_back(labels[i]);
  }
  const LogRegModel model = train_logreg(train_x, train_y, options);

  std::vector<double> scores;
  std::vector<int> test_y;
  for (std::size_t i : split.test) {
    scores.push_back(predict_proba(model, features[i]));
    test_y.push_back(labels[i]);
  }
  report.auc = roc_auc(scores, test_y);
  report.n_train = split.train.size();
  report.n_test = split.test.size();
  return report;
}

void write_attribute_report_header(std::ostream& out) {
  out << "attribute\tauc\tn_train\tn_test\tn_excluded\n";
}

void write_attribute_report(std::ostream& out, std::string_view attribute,
                            const AttributeReport& report) {
  out << attribute << '\t' << format_value(report.auc) << '\t' << report.n_train
      << '\t' << report.n_test << '\t' << report.n_excluded << '\n';
}

}  // namespace cofollow
