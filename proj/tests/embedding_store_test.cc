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

#include "cofollow/embedding_store.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cofollow/corpus.h"
#include "cofollow/error.h"
#include "cofollow/trainer.h"
#include "oracles.h"

namespace cofollow {
namespace {

std::string saved(const EmbeddingStore& store) {
  std::ostringstream out;
  save_embeddings(store, out);
  return out.str();
}

EmbeddingStore loaded(const std::string& text) {
  std::istringstream in(text);
  return load_embeddings(in);
}

EmbeddingStore random_store(RandomEngine& rng, std::size_t n, std::size_t d) {
  std::vector<std::string> ids;
  std::vector<double> values;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("e" + std::to_string(i));
    for (std::size_t k = 0; k < d; ++k) {
      const double mag = std::pow(10.0, oracle::uniform(rng, -12, 12));
      values.push_back(uniform01(rng) < 0.5 ? -mag : mag);
    }
  }
  return EmbeddingStore(ids, d, values);
}

TEST(EmbeddingStore, ConstructorValidates) {
  EXPECT_THROW(EmbeddingStore({"a", "a"}, 1, {1, 2}), DomainError);
  EXPECT_THROW(EmbeddingStore({"a"}, 2, {1}), DomainError);
  EXPECT_THROW(EmbeddingStore({"a"}, 1, {NAN}), DomainError);
  const EmbeddingStore s({"a", "b"}, 1, {1, 2});
  EXPECT_EQ(s.index_of("b"), 1u);
  EXPECT_THROW(s.index_of("c"), LookupError);
  EXPECT_FALSE(s.contains("c"));
}

TEST(EmbeddingStore, FromModelUsesTargetVectors) {
  EmbeddingModel model(2, 2);
  model.target_table() = {1, 2, 3, 4};
  model.context_table() = {9, 9, 9, 9};
  const Vocabulary vocab({{0, "x", 5}, {1, "y", 4}}, 1);
  const EmbeddingStore s = EmbeddingStore::from_model(model, vocab);
  EXPECT_EQ(s.vector("y")[0], 3.0);
  EXPECT_EQ(s.vector("y")[1], 4.0);
}

TEST(FormatValue, Examples) {
  EXPECT_EQ(format_value(1.0), "1.0");
  EXPECT_EQ(format_value(-2.0), "-2.0");
  EXPECT_EQ(format_value(0.0), "0.0");
  EXPECT_EQ(format_value(0.25), "0.25");
  EXPECT_EQ(format_value(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_value(1e-20), "1e-20");
  EXPECT_EQ(format_value(123456789012.0), "1.23456789e+11");
}

TEST(SaveEmbeddings, OneEntityBodyLine) {
  const EmbeddingStore s({"e1"}, 2, {1.0, 2.0});
  EXPECT_EQ(saved(s), "1 2\ne1 1.0 2.0\n");
}

TEST(SaveEmbeddings, SaveLoadSaveIsByteIdentical) {
  RandomEngine rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const EmbeddingStore s = random_store(rng, 1 + oracle::pick(rng, 30), 1 + oracle::pick(rng, 8));
    const std::string first = saved(s);
    const EmbeddingStore back = loaded(first);
    EXPECT_EQ(saved(back), first);
    for (std::size_t i = 0; i < s.data().size(); ++i)
      EXPECT_NEAR(back.data()[i], s.data()[i], std::abs(s.data()[i]) * 1e-8);
  }
}

TEST(SaveEmbeddings, FileRoundTrip) {
  oracle::TempDir dir("store");
  const EmbeddingStore s({"a", "b"}, 2, {0.5, -1.5, 2.0, 3.0});
  save_embeddings(s, dir.file("e.txt"));
  EXPECT_EQ(load_embeddings(dir.file("e.txt")), s);
  EXPECT_THROW(load_embeddings(dir.file("missing.txt")), IoError);
}

void expect_parse_error_at(const std::string& text, std::size_t line) {
  try {
    loaded(text);
    FAIL() << "expected ParseError for:\n" << text;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
  }
}

TEST(LoadEmbeddings, Errors) {
  expect_parse_error_at("2 3\na 1 2 3 4\nb 1 2 3\n", 2);
  expect_parse_error_at("2 2\na 1 2\na 3 4\n", 3);
  expect_parse_error_at("1 2\na 1 inf\n", 2);
  expect_parse_error_at("1 2\na 1 nan\n", 2);
  expect_parse_error_at("1 2\na 1 x\n", 2);
  expect_parse_error_at("x y\n", 1);
  expect_parse_error_at("3 1\na 1\nb 2\n", 3);
}

TEST(CosineSimilarity, Examples) {
  const std::vector<double> v = {0.3, -1.7, 2.9};
  EXPECT_EQ(cosine_similarity(v, v), 1.0);
  EXPECT_EQ(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine_similarity(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}),
              0.974631846, 1e-9);
}

TEST(CosineSimilarity, ErrorsAndProperties) {
  EXPECT_THROW(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}),
               DomainError);
  EXPECT_THROW(cosine_similarity(std::vector<double>{1}, std::vector<double>{1, 0}),
               DomainError);
  RandomEngine rng(12);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a(5), b(5), sa(5), sb(5);
    const double alpha = oracle::uniform(rng, 0.01, 100), beta = oracle::uniform(rng, 0.01, 100);
    for (int k = 0; k < 5; ++k) {
      a[k] = oracle::uniform(rng, -1, 1);
      b[k] = oracle::uniform(rng, -1, 1);
      sa[k] = alpha * a[k];
      sb[k] = beta * b[k];
    }
    const double c = cosine_similarity(a, b);
    EXPECT_EQ(c, cosine_similarity(b, a));
    EXPECT_NEAR(c, cosine_similarity(sa, sb), 1e-14);
    EXPECT_LE(std::abs(c), 1.0);
  }
}

TEST(NearestNeighbors, DuplicateIdsAreMutualTop1) {
  const EmbeddingStore s({"a", "b", "c"}, 2, {1, 2, 1, 2, -1, 0.5});
  const auto na = nearest_neighbors(s, "a", 1);
  ASSERT_EQ(na.size(), 1u);
  EXPECT_EQ(na[0], (Neighbor{"b", 1.0}));
  EXPECT_EQ(nearest_neighbors(s, "b", 1)[0], (Neighbor{"a", 1.0}));
}

TEST(NearestNeighbors, LargeTopKReturnsAllOthers) {
  const EmbeddingStore s({"a", "b", "c"}, 2, {1, 0, 0, 1, 1, 1});
  EXPECT_EQ(nearest_neighbors(s, "a", 10).size(), 2u);
  EXPECT_THROW(nearest_neighbors(s, "zz", 1), LookupError);
  EXPECT_THROW(nearest_neighbors(s, "a", 0), DomainError);
}

TEST(NearestNeighbors, MatchesBruteForceSortAndIsPrefixStable) {
  RandomEngine rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + oracle::pick(rng, 30);
    std::vector<std::string> ids;
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("id" + std::to_string(i));
      // Coarse values force exact ties.
      for (int k = 0; k < 3; ++k) values.push_back(1.0 + static_cast<double>(oracle::pick(rng, 3)));
    }
    const EmbeddingStore s(ids, 3, values);
    const std::string query = ids[oracle::pick(rng, n)];

    std::vector<Neighbor> expected;
    for (const auto& id : ids)
      if (id != query) expected.push_back({id, cosine_similarity(s.vector(query), s.vector(id))});
    std::sort(expected.begin(), expected.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.similarity != b.similarity ? a.similarity > b.similarity : a.entity_id < b.entity_id;
    });
    EXPECT_EQ(nearest_neighbors(s, query, n), expected);
    for (std::size_t k = 1; k < n - 1; ++k) {
      const auto shorter = nearest_neighbors(s, query, k);
      EXPECT_TRUE(std::equal(shorter.begin(), shorter.end(), expected.begin()));
    }
  }
}

}  // namespace
}  // namespace cofollow
