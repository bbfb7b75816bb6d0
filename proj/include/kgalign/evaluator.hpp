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

// Alignment by exact ℓ1 nearest-neighbour ranking.
//
// A query is one side of a test ILL; its candidates are the other-side
// entities of the chosen universe. Candidates are ordered by ascending ℓ1
// distance, ties by ascending entity id, and the gold counterpart's 1-based
// position is the query's rank.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "kgalign/common.hpp"
#include "kgalign/kg_data.hpp"
#include "kgalign/linalg.hpp"

namespace kgalign {

enum class Direction : std::uint8_t { kSourceToTarget, kTargetToSource };

inline std::string_view direction_name(Direction d) {
  return d == Direction::kSourceToTarget ? "src_to_tgt" : "tgt_to_src";
}

// Which entities compete as candidates: the other-side members of the test
// ILLs (the dataset convention) or every entity of the other graph.
enum class Universe : std::uint8_t { kTest, kAll };

inline Universe parse_universe(std::string_view s) {
  if (s == "test") return Universe::kTest;
  if (s == "all") return Universe::kAll;
  fail("unknown universe '", std::string(s), "' (expected test or all)");
}

inline std::string_view universe_name(Universe u) { return u == Universe::kTest ? "test" : "all"; }

struct RankingResult {
  Direction direction = Direction::kSourceToTarget;
  std::map<std::size_t, double> hits;
  std::vector<std::size_t> per_query_rank;
  double mean_rank = 0.0;
  double mrr = 0.0;
};

inline double hits_at_k(const std::vector<std::size_t>& ranks, std::size_t k) {
  KGALIGN_CHECK(!ranks.empty(), "hits@k of an empty rank list");
  std::size_t hit = 0;
  for (std::size_t r : ranks) {
    KGALIGN_CHECK(r >= 1, "ranks are 1-based, got ", r);
    if (r <= k) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(ranks.size());
}

inline RankingResult summarize_ranks(Direction direction, std::vector<std::size_t> ranks,
                                     const std::vector<std::size_t>& ks) {
  RankingResult res;
  res.direction = direction;
  for (std::size_t k : ks) res.hits[k] = hits_at_k(ranks, k);
  double sum = 0.0, rr = 0.0;
  for (std::size_t r : ranks) {
    sum += static_cast<double>(r);
    rr += 1.0 / static_cast<double>(r);
  }
  res.mean_rank = sum / static_cast<double>(ranks.size());
  res.mrr = rr / static_cast<double>(ranks.size());
  res.per_query_rank = std::move(ranks);
  return res;
}

// (query, gold) pairs for a direction, in test-ILL order.
inline std::vector<EntityPair> oriented_test_pairs(const AlignmentTask& task, Direction direction) {
  std::vector<EntityPair> out;
  out.reserve(task.test_ills.size());
  for (const auto& p : task.test_ills)
    out.push_back(direction == Direction::kSourceToTarget ? p : EntityPair{p.target, p.source});
  return out;
}

// Candidate ids for a direction, ascending.
inline std::vector<EntityId> candidate_universe(const AlignmentTask& task, Direction direction, Universe universe) {
  std::vector<EntityId> cands;
  const bool to_target = direction == Direction::kSourceToTarget;
  if (universe == Universe::kAll) {
    const std::size_t begin = to_target ? task.offset() : 0;
    const std::size_t end = to_target ? task.total() : task.offset();
    cands.resize(end - begin);
    std::iota(cands.begin(), cands.end(), begin);
  } else {
    for (const auto& p : task.test_ills) cands.push_back(to_target ? p.target : p.source);
    std::sort(cands.begin(), cands.end());
  }
  return cands;
}

inline void check_embedding_covers(const EmbeddingMatrix& emb, const AlignmentTask& task) {
  KGALIGN_CHECK(emb.rows() == task.total(), "embedding has ", emb.rows(), " rows but the task has ", task.total(),
                " entities");
}

inline RankingResult rank_all(const EmbeddingMatrix& emb, const AlignmentTask& task, Direction direction,
                              const std::vector<std::size_t>& ks = {1, 10, 50},
                              Universe universe = Universe::kTest) {
  check_embedding_covers(emb, task);
  KGALIGN_CHECK(!task.test_ills.empty(), "task has no test ILLs");
  const auto queries = oriented_test_pairs(task, direction);
  const auto cands = candidate_universe(task, direction, universe);
  std::vector<std::size_t> ranks(queries.size());
  parallel_rows(queries.size(), cands.size() * emb.cols(), [&](std::size_t b, std::size_t e) {
    for (std::size_t qi = b; qi < e; ++qi) {
      const auto [query, gold] = queries[qi];
      auto qrow = emb.row(query);
      const double gold_dist = l1_distance(qrow, emb.row(gold));
      std::size_t better = 0;
      for (EntityId c : cands) {
        if (c == gold) continue;
        const double d = l1_distance(qrow, emb.row(c));
        if (d < gold_dist || (d == gold_dist && c < gold)) ++better;
      }
      ranks[qi] = better + 1;
    }
  });
  return summarize_ranks(direction, std::move(ranks), ks);
}

// Top-q nearest targets for every source entity of the test ILLs.
struct CandidatePool {
  std::size_t q = 0;
  std::vector<EntityId> queries;
  std::vector<std::vector<EntityId>> candidates;  // ascending distance, id tiebreak

  bool operator==(const CandidatePool&) const = default;
};

inline CandidatePool top_q_candidates(const EmbeddingMatrix& emb, const AlignmentTask& task, std::size_t q,
                                      Universe universe = Universe::kTest) {
  KGALIGN_CHECK(q >= 1, "candidate pool size must be at least 1");
  check_embedding_covers(emb, task);
  const auto queries = oriented_test_pairs(task, Direction::kSourceToTarget);
  const auto cands = candidate_universe(task, Direction::kSourceToTarget, universe);
  CandidatePool pool;
  pool.q = q;
  pool.queries.reserve(queries.size());
  for (const auto& p : queries) pool.queries.push_back(p.source);
  pool.candidates.resize(queries.size());
  const std::size_t keep = std::min(q, cands.size());
  parallel_rows(queries.size(), cands.size() * emb.cols(), [&](std::size_t b, std::size_t e) {
    std::vector<std::pair<double, EntityId>> scored(cands.size());
    for (std::size_t qi = b; qi < e; ++qi) {
      auto qrow = emb.row(queries[qi].source);
      for (std::size_t i = 0; i < cands.size(); ++i) scored[i] = {l1_distance(qrow, emb.row(cands[i])), cands[i]};
      std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end());
      auto& out = pool.candidates[qi];
      out.resize(keep);
      for (std::size_t i = 0; i < keep; ++i) out[i] = scored[i].second;
    }
  });
  return pool;
}

// Fraction of queries whose gold counterpart made it into the pool.
inline double pool_recall(const CandidatePool& pool, const AlignmentTask& task) {
  std::map<EntityId, EntityId> gold;
  for (const auto& p : task.test_ills) gold[p.source] = p.target;
  KGALIGN_CHECK(!pool.queries.empty(), "empty candidate pool");
  std::size_t found = 0;
  for (std::size_t i = 0; i < pool.queries.size(); ++i) {
    auto it = gold.find(pool.queries[i]);
    KGALIGN_CHECK(it != gold.end(), "pool query ", pool.queries[i], " is not a test source entity");
    const auto& c = pool.candidates[i];
    if (std::find(c.begin(), c.end(), it->second) != c.end()) ++found;
  }
  return static_cast<double>(found) / static_cast<double>(pool.queries.size());
}

// pool.tsv: one line per query, "src_id\tcand1,cand2,...".
inline std::string format_pool(const CandidatePool& pool) {
  std::string out;
  for (std::size_t i = 0; i < pool.queries.size(); ++i) {
    out += std::to_string(pool.queries[i]);
    out += '\t';
    for (std::size_t j = 0; j < pool.candidates[i].size(); ++j) {
      if (j) out += ',';
      out += std::to_string(pool.candidates[i][j]);
    }
    out += '\n';
  }
  return out;
}

// The file carries no explicit q; it is taken as the longest candidate list.
inline CandidatePool parse_pool(std::string_view text, std::string_view source = "<pool>") {
  CandidatePool pool;
  std::size_t lineno = 0;
  for (auto raw_line : split(text, '\n')) {
    ++lineno;
    auto line = strip_cr(raw_line);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) fail(source, ":", lineno, ": expected src_id<TAB>cand1,cand2,...");
    std::int64_t src;
    if (!parse_int(fields[0], src) || src < 0) fail(source, ":", lineno, ": malformed source id");
    std::vector<EntityId> cands;
    if (!fields[1].empty()) {
      for (auto tok : split(fields[1], ',')) {
        std::int64_t c;
        if (!parse_int(tok, c) || c < 0) fail(source, ":", lineno, ": malformed candidate id '", std::string(tok), "'");
        if (std::find(cands.begin(), cands.end(), static_cast<EntityId>(c)) != cands.end())
          fail(source, ":", lineno, ": duplicate candidate ", c);
        cands.push_back(static_cast<EntityId>(c));
      }
    }
    pool.q = std::max(pool.q, cands.size());
    pool.queries.push_back(static_cast<EntityId>(src));
    pool.candidates.push_back(std::move(cands));
  }
  KGALIGN_CHECK(!pool.queries.empty(), source, ": empty candidate pool");
  return pool;
}

}  // namespace kgalign
