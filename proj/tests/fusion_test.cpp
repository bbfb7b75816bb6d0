// Copyright 2026 The kgalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "kgalign/fusion.hpp"
#include "oracles.hpp"

namespace kgalign {
namespace {

AlignmentTask id_task(std::size_t n, std::size_t n_train) {
  AlignmentTask t;
  t.source.entity_count = t.target.entity_count = n;
  for (std::size_t i = 0; i < n; ++i) (i < n_train ? t.train_ills : t.test_ills).push_back({i, n + i});
  return t;
}

EmbeddingMatrix random_emb(std::size_t n, std::size_t d, Rng& rng) {
  EmbeddingMatrix e(n, d);
  for (double& v : e.data()) v = uniform_real(rng, -1.0, 1.0);
  return e;
}

TEST(EmbeddingFile, RoundTrip) {
  Rng rng(51);
  EmbeddingMatrix e = random_emb(4, 3, rng);
  auto f = to_embedding_file(e);
  std::string text = format_embedding_tsv(f);
  EXPECT_EQ(text.substr(0, 7), "#dim 3\n");
  auto back = parse_embedding_tsv(text);
  EXPECT_EQ(back, f);
  EXPECT_EQ(to_matrix(back, 4), e);
}

TEST(EmbeddingFile, ParseErrors) {
  EXPECT_THROW(parse_embedding_tsv(""), Error);
  EXPECT_THROW(parse_embedding_tsv("0\t1 2\n"), Error);
  EXPECT_THROW(parse_embedding_tsv("#dim 2\n0\t1\n"), Error);
  EXPECT_THROW(parse_embedding_tsv("#dim 2\n0\t1 2\n0\t3 4\n"), Error);
  EXPECT_THROW(parse_embedding_tsv("#dim 2\n0\t1 nan\n"), Error);
  EXPECT_THROW(parse_embedding_tsv("#dim 0\n"), Error);
  try {
    parse_embedding_tsv("#dim 1\n0\t1\n1 2\n", "t.tsv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("t.tsv:3"), std::string::npos) << e.what();
  }
}

TEST(WeightedConcat, DirectSubstitution) {
  EmbeddingMatrix g(1, 2);
  g.data() = {1.0, 0.0};
  TextualEmbeddingFile t{2, {{0, {0.0, 1.0}}}};
  auto fused = weighted_concat(g, t, 0.8);
  const std::vector<double> expect{0.8, 0.0, 0.0, 0.2};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(fused.matrix.data()[i], expect[i]);
  EXPECT_EQ(fused.missing_text_rows, 0u);
}

TEST(WeightedConcat, MissingRowsAreZeroFilledAndCounted) {
  Rng rng(52);
  EmbeddingMatrix g = random_emb(3, 2, rng);
  TextualEmbeddingFile t{2, {{1, {3.0, 4.0}}}};
  auto fused = weighted_concat(g, t, 0.5);
  EXPECT_EQ(fused.missing_text_rows, 2u);
  EXPECT_EQ(fused.matrix(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(fused.matrix(1, 2), 0.5 * 0.6);
}

TEST(WeightedConcat, Errors) {
  EmbeddingMatrix g(2, 2);
  EXPECT_THROW(weighted_concat(g, TextualEmbeddingFile{1, {}}, 1.5), Error);
  EXPECT_THROW(weighted_concat(g, TextualEmbeddingFile{1, {}}, -0.1), Error);
  EXPECT_THROW(weighted_concat(g, TextualEmbeddingFile{1, {{5, {1.0}}}}, 0.5), Error);
}

TEST(WeightedConcat, L1DistanceDecomposes) {
  Rng rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 6);
    EmbeddingMatrix g = random_emb(n, 1 + uniform_index(rng, 4), rng);
    EmbeddingMatrix b = random_emb(n, 1 + uniform_index(rng, 4), rng);
    const double tau = uniform01(rng);
    auto fused = weighted_concat(g, to_embedding_file(b), tau).matrix;
    auto gn = l2_normalize_rows(g), bn = l2_normalize_rows(b);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double lhs = l1_distance(fused.row(i), fused.row(j));
        const double rhs = tau * l1_distance(gn.row(i), gn.row(j)) + (1 - tau) * l1_distance(bn.row(i), bn.row(j));
        ASSERT_NEAR(lhs, rhs, 1e-9);
      }
  }
}

TEST(WeightedConcat, EndpointsReproduceSingleSourceRankings) {
  Rng rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    AlignmentTask t = id_task(6, 2);
    EmbeddingMatrix g = random_emb(12, 3, rng), b = random_emb(12, 5, rng);
    auto text = to_embedding_file(b);
    for (Direction d : {Direction::kSourceToTarget, Direction::kTargetToSource}) {
      EXPECT_EQ(rank_all(weighted_concat(g, text, 1.0).matrix, t, d).per_query_rank,
                rank_all(l2_normalize_rows(g), t, d).per_query_rank);
      EXPECT_EQ(rank_all(weighted_concat(g, text, 0.0).matrix, t, d).per_query_rank,
                rank_all(l2_normalize_rows(b), t, d).per_query_rank);
    }
    EXPECT_EQ(top_q_candidates(weighted_concat(g, text, 1.0).matrix, t, 4),
              top_q_candidates(l2_normalize_rows(g), t, 4));
  }
}

TEST(Scores, ParseAndValidate) {
  auto s = parse_scores("0\t5\t0.25\n0\t6\t1\n");
  EXPECT_EQ(s.entries.size(), 2u);
  EXPECT_EQ(s.entries.at({0, 5}), 0.25);
  EXPECT_THROW(parse_scores("0\t5\t1.5\n"), Error);
  EXPECT_THROW(parse_scores("0\t5\t-0.1\n"), Error);
  EXPECT_THROW(parse_scores("0\t5\t0.1\n0\t5\t0.2\n"), Error);
  EXPECT_THROW(parse_scores("0\t5\n"), Error);
  EXPECT_THROW(parse_scores("0\t5\tinf\n"), Error);
}

CandidatePool pool_for(const AlignmentTask& t, std::size_t q, Rng& rng) {
  CandidatePool p;
  p.q = q;
  for (const auto& ill : t.test_ills) {
    p.queries.push_back(ill.source);
    std::vector<EntityId> all;
    for (const auto& other : t.test_ills) all.push_back(other.target);
    shuffle(all, rng);
    all.resize(q);
    p.candidates.push_back(all);
  }
  return p;
}

TEST(Rerank, IndicatorScoresGiveRecall) {
  Rng rng(55);
  AlignmentTask t = id_task(10, 2);
  CandidatePool p = pool_for(t, 3, rng);
  ScoreFile s;
  for (std::size_t i = 0; i < p.queries.size(); ++i)
    for (EntityId c : p.candidates[i]) s.entries[{p.queries[i], c}] = c == p.queries[i] + 10 ? 1.0 : 0.0;
  auto r = rerank(p, s, t, {1});
  EXPECT_DOUBLE_EQ(r.hits.at(1), pool_recall(p, t));
}

TEST(Rerank, UniformScoresKeepPoolOrder) {
  Rng rng(56);
  AlignmentTask t = id_task(10, 2);
  CandidatePool p = pool_for(t, 4, rng);
  ScoreFile s;
  for (std::size_t i = 0; i < p.queries.size(); ++i)
    for (EntityId c : p.candidates[i]) s.entries[{p.queries[i], c}] = 0.5;
  auto r = rerank(p, s, t, {1});
  for (std::size_t i = 0; i < p.queries.size(); ++i) {
    auto it = std::find(p.candidates[i].begin(), p.candidates[i].end(), p.queries[i] + 10);
    const std::size_t expect = it == p.candidates[i].end() ? 5 : static_cast<std::size_t>(it - p.candidates[i].begin()) + 1;
    EXPECT_EQ(r.per_query_rank[i], expect);
  }
}

TEST(Rerank, RandomScoresMatchStableSortOracle) {
  Rng rng(57);
  for (int trial = 0; trial < 100; ++trial) {
    AlignmentTask t = id_task(8, 2);
    const std::size_t q = 1 + uniform_index(rng, 6);
    CandidatePool p = pool_for(t, q, rng);
    ScoreFile s;
    for (std::size_t i = 0; i < p.queries.size(); ++i)
      for (EntityId c : p.candidates[i])
        s.entries[{p.queries[i], c}] = static_cast<double>(uniform_index(rng, 4)) / 3.0;  // ties on purpose
    auto r = rerank(p, s, t, {1, 3});
    for (std::size_t i = 0; i < p.queries.size(); ++i) {
      // Insertion sort by descending score: stable by construction.
      std::vector<EntityId> order;
      for (EntityId c : p.candidates[i]) {
        auto pos = order.end();
        while (pos != order.begin() && s.entries[{p.queries[i], *(pos - 1)}] < s.entries[{p.queries[i], c}]) --pos;
        order.insert(pos, c);
      }
      auto it = std::find(order.begin(), order.end(), p.queries[i] + 8);
      const std::size_t expect = it == order.end() ? q + 1 : static_cast<std::size_t>(it - order.begin()) + 1;
      ASSERT_EQ(r.per_query_rank[i], expect);
    }
    for (const auto& [k, h] : r.hits) ASSERT_LE(h, pool_recall(p, t));
  }
}

TEST(Rerank, MissingScoreNamesThePair) {
  AlignmentTask t = id_task(3, 1);
  CandidatePool p;
  p.q = 1;
  p.queries = {1};
  p.candidates = {{4}};
  try {
    rerank(p, ScoreFile{}, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("(1,4)"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace kgalign
