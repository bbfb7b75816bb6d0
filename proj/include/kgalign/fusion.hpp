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

// Combining graph embeddings with externally produced text signals.
//
// Embedding files (graph or textual) are TSV:
//
//   #dim <d>
//   <entity_id>\t<v1> <v2> ... <vd>
//
// Score files are TSV lines "<src_id>\t<tgt_id>\t<score>" with score in
// [0, 1]. Entity ids are the task's combined ids.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgalign/common.hpp"
#include "kgalign/evaluator.hpp"
#include "kgalign/kg_data.hpp"
#include "kgalign/linalg.hpp"

namespace kgalign {

struct TextualEmbeddingFile {
  std::size_t dim = 0;
  std::map<EntityId, std::vector<double>> rows;

  bool operator==(const TextualEmbeddingFile&) const = default;
};

inline TextualEmbeddingFile parse_embedding_tsv(std::string_view text, std::string_view source = "<embeddings>") {
  TextualEmbeddingFile f;
  bool have_dim = false;
  std::size_t lineno = 0;
  for (auto raw_line : split(text, '\n')) {
    ++lineno;
    auto line = strip_cr(raw_line);
    if (line.empty()) continue;
    if (!have_dim) {
      std::int64_t d;
      if (!line.starts_with("#dim ") || !parse_int(line.substr(5), d) || d < 1)
        fail(source, ":", lineno, ": expected header '#dim <d>'");
      f.dim = static_cast<std::size_t>(d);
      have_dim = true;
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) fail(source, ":", lineno, ": expected <entity_id>\\t<values>");
    std::int64_t id;
    if (!parse_int(line.substr(0, tab), id) || id < 0) fail(source, ":", lineno, ": malformed entity id");
    std::vector<double> values;
    values.reserve(f.dim);
    for (auto tok : split(line.substr(tab + 1), ' ')) {
      double v;
      if (!parse_double(tok, v)) fail(source, ":", lineno, ": malformed value '", std::string(tok), "'");
      values.push_back(v);
    }
    if (values.size() != f.dim)
      fail(source, ":", lineno, ": expected ", f.dim, " values, got ", values.size());
    if (!f.rows.emplace(static_cast<EntityId>(id), std::move(values)).second)
      fail(source, ":", lineno, ": duplicate entity id ", id);
  }
  if (!have_dim) fail(source, ": missing '#dim <d>' header");
  return f;
}

inline std::string format_embedding_tsv(const TextualEmbeddingFile& f) {
  std::string out = "#dim " + std::to_string(f.dim) + "\n";
  for (const auto& [id, values] : f.rows) {
    out += std::to_string(id);
    out += '\t';
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ' ';
      out += format_double(values[i]);
    }
    out += '\n';
  }
  return out;
}

inline TextualEmbeddingFile to_embedding_file(const EmbeddingMatrix& m) {
  TextualEmbeddingFile f;
  f.dim = m.cols();
  for (std::size_t r = 0; r < m.rows(); ++r) f.rows.emplace(r, std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return f;
}

// Dense table over `entity_count` rows; absent ids become zero rows and are
// counted in `missing`.
inline EmbeddingMatrix to_matrix(const TextualEmbeddingFile& f, std::size_t entity_count, std::size_t* missing = nullptr) {
  EmbeddingMatrix m(entity_count, f.dim);
  std::size_t absent = entity_count;
  for (const auto& [id, values] : f.rows) {
    KGALIGN_CHECK(id < entity_count, "embedding row for entity ", id, " outside the task (", entity_count,
                  " entities)");
    std::copy(values.begin(), values.end(), m.row(id).begin());
    --absent;
  }
  if (missing) *missing = absent;
  return m;
}

struct FusedEmbedding {
  EmbeddingMatrix matrix;
  std::size_t missing_text_rows = 0;
};

// τ·Ĥ_G ⊕ (1−τ)·Ĥ_B where Ĥ denotes row-wise ℓ2 normalization. Entities
// without a text row get a zero text block.
inline FusedEmbedding weighted_concat(const EmbeddingMatrix& graph, const TextualEmbeddingFile& text, double tau) {
  KGALIGN_CHECK(tau >= 0.0 && tau <= 1.0, "tau must lie in [0,1], got ", tau);
  FusedEmbedding out;
  EmbeddingMatrix g = l2_normalize_rows(graph);
  EmbeddingMatrix t = l2_normalize_rows(to_matrix(text, graph.rows(), &out.missing_text_rows));
  out.matrix = EmbeddingMatrix(graph.rows(), g.cols() + t.cols());
  for (std::size_t r = 0; r < graph.rows(); ++r) {
    auto dst = out.matrix.row(r);
    auto gr = g.row(r);
    auto tr = t.row(r);
    for (std::size_t c = 0; c < gr.size(); ++c) dst[c] = tau * gr[c];
    for (std::size_t c = 0; c < tr.size(); ++c) dst[gr.size() + c] = (1.0 - tau) * tr[c];
  }
  return out;
}

struct ScoreFile {
  std::map<std::pair<EntityId, EntityId>, double> entries;
};

inline ScoreFile parse_scores(std::string_view text, std::string_view source = "<scores>") {
  ScoreFile f;
  std::size_t lineno = 0;
  for (auto raw_line : split(text, '\n')) {
    ++lineno;
    auto line = strip_cr(raw_line);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) fail(source, ":", lineno, ": expected <src_id>\\t<tgt_id>\\t<score>");
    std::int64_t s, t;
    double score;
    if (!parse_int(fields[0], s) || s < 0 || !parse_int(fields[1], t) || t < 0)
      fail(source, ":", lineno, ": malformed entity id");
    if (!parse_double(fields[2], score)) fail(source, ":", lineno, ": malformed score '", std::string(fields[2]), "'");
    if (score < 0.0 || score > 1.0) fail(source, ":", lineno, ": score ", score, " outside [0,1]");
    auto key = std::make_pair(static_cast<EntityId>(s), static_cast<EntityId>(t));
    if (!f.entries.emplace(key, score).second) fail(source, ":", lineno, ": duplicate pair (", s, ",", t, ")");
  }
  return f;
}

// Reorders each pool by descending score, keeping the original pool order on
// ties. A gold counterpart outside its pool gets the sentinel rank q + 1,
// which enters mean rank and MRR but is a miss at every k, including k > q.
inline RankingResult rerank(const CandidatePool& pool, const ScoreFile& scores, const AlignmentTask& task,
                            const std::vector<std::size_t>& ks = {1, 10, 50}) {
  std::map<EntityId, EntityId> gold;
  for (const auto& p : task.test_ills) gold[p.source] = p.target;
  std::vector<std::size_t> ranks;
  ranks.reserve(pool.queries.size());
  for (std::size_t i = 0; i < pool.queries.size(); ++i) {
    const EntityId src = pool.queries[i];
    auto g = gold.find(src);
    KGALIGN_CHECK(g != gold.end(), "pool query ", src, " is not a source entity of a test ILL");
    std::vector<std::pair<double, EntityId>> scored;
    for (EntityId c : pool.candidates[i]) {
      auto it = scores.entries.find({src, c});
      if (it == scores.entries.end()) fail("missing score for pool pair (", src, ",", c, ")");
      scored.emplace_back(it->second, c);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t rank = pool.q + 1;
    for (std::size_t j = 0; j < scored.size(); ++j) {
      if (scored[j].second == g->second) {
        rank = j + 1;
        break;
      }
    }
    ranks.push_back(rank);
  }
  KGALIGN_CHECK(!ranks.empty(), "empty candidate pool");
  RankingResult res = summarize_ranks(Direction::kSourceToTarget, ranks, ks);
  for (std::size_t k : ks) {
    std::size_t hit = 0;
    for (std::size_t r : ranks) hit += r <= std::min(k, pool.q);
    res.hits[k] = static_cast<double>(hit) / static_cast<double>(ranks.size());
  }
  return res;
}

}  // namespace kgalign
