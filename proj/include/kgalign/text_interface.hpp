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

// File contract with the external description encoder.
//
// The encoder is a separate program. It reads entity descriptions and
// training ILLs, and writes either a textual embedding file (pairwise mode)
// or a score file over a candidate pool (pointwise mode). This header holds
// the types and files on our side of that boundary plus conformance checks
// for what comes back; nothing here runs a language model.
//
//   descriptions   "<entity_id>\t<text>", UTF-8, one graph per file
//   ILLs           "<src_id>\t<tgt_id>"
//
// Ids are the task's combined ids.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "kgalign/common.hpp"
#include "kgalign/evaluator.hpp"
#include "kgalign/fusion.hpp"
#include "kgalign/kg_data.hpp"

namespace kgalign {

inline constexpr std::size_t kTextEmbeddingDim = 300;

struct DescriptionCorpus {
  std::map<EntityId, std::string> text;
  bool operator==(const DescriptionCorpus&) const = default;
};

// Tabs and newlines inside a description are not representable; everything
// after the first tab is the text.
inline DescriptionCorpus parse_descriptions(std::string_view data, std::string_view source = "<descriptions>") {
  DescriptionCorpus c;
  std::size_t lineno = 0;
  for (auto raw_line : split(data, '\n')) {
    ++lineno;
    auto line = strip_cr(raw_line);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) fail(source, ":", lineno, ": expected <entity_id>\\t<text>");
    std::int64_t id;
    if (!parse_int(line.substr(0, tab), id) || id < 0) fail(source, ":", lineno, ": malformed entity id");
    if (!c.text.emplace(static_cast<EntityId>(id), std::string(line.substr(tab + 1))).second)
      fail(source, ":", lineno, ": duplicate entity id ", id);
  }
  return c;
}

inline std::string format_descriptions(const DescriptionCorpus& c) {
  std::string out;
  for (const auto& [id, text] : c.text) {
    KGALIGN_CHECK(text.find_first_of("\t\n") == std::string::npos, "description of entity ", id,
                  " contains a tab or newline");
    out += std::to_string(id) + '\t' + text + '\n';
  }
  return out;
}

inline std::string format_ills(const std::vector<EntityPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += std::to_string(p.source) + '\t' + std::to_string(p.target) + '\n';
  return out;
}

inline std::vector<EntityPair> parse_ills(std::string_view data, std::string_view source = "<ills>") {
  std::vector<EntityPair> out;
  std::size_t lineno = 0;
  for (auto raw_line : split(data, '\n')) {
    ++lineno;
    auto line = strip_cr(raw_line);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    std::int64_t s, t;
    if (fields.size() != 2 || !parse_int(fields[0], s) || s < 0 || !parse_int(fields[1], t) || t < 0)
      fail(source, ":", lineno, ": expected <src_id>\\t<tgt_id>");
    out.push_back({static_cast<EntityId>(s), static_cast<EntityId>(t)});
  }
  return out;
}

enum class EncoderMode : std::uint8_t { kPointwise, kPairwise };

// Settings the encoder is run with; recorded next to its outputs.
struct EncoderConfig {
  EncoderMode mode = EncoderMode::kPairwise;
  std::size_t output_dim = kTextEmbeddingDim;
  double margin = 3.0;
  std::size_t negatives = 5;
  std::size_t max_sequence_length = 128;
  std::uint64_t seed = 7;

  void validate() const {
    KGALIGN_CHECK(output_dim == kTextEmbeddingDim, "text embeddings are ", kTextEmbeddingDim,
                  "-dimensional, got ", output_dim);
    KGALIGN_CHECK(margin > 0.0, "encoder margin must be positive");
    KGALIGN_CHECK(negatives >= 1, "encoder needs at least one negative");
    KGALIGN_CHECK(max_sequence_length >= 1, "max sequence length must be positive");
  }
};

// Conformance of files handed back by the encoder. Each problem is one
// human-readable line; an empty list means the file is usable as is.
inline std::vector<std::string> check_text_embeddings(const TextualEmbeddingFile& f, const AlignmentTask& task,
                                                      std::size_t expected_dim = kTextEmbeddingDim) {
  std::vector<std::string> problems;
  if (f.dim != expected_dim) problems.push_back(str_cat("dimension ", f.dim, ", expected ", expected_dim));
  for (const auto& [id, values] : f.rows) {
    if (id >= task.total()) problems.push_back(str_cat("entity ", id, " outside the task"));
    for (double v : values) {
      if (!std::isfinite(v)) {
        problems.push_back(str_cat("entity ", id, " has a non-finite value"));
        break;
      }
    }
  }
  return problems;
}

inline std::vector<std::string> check_scores(const ScoreFile& scores, const CandidatePool& pool) {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < pool.queries.size(); ++i)
    for (EntityId c : pool.candidates[i])
      if (!scores.entries.count({pool.queries[i], c}))
        problems.push_back(str_cat("missing score for (", pool.queries[i], ",", c, ")"));
  return problems;
}

// Mean ℓ1 distance of gold test pairs versus the same sources paired with
// every other test target. A trained encoder should put gold pairs closer.
struct Separation {
  double gold = 0.0;
  double random = 0.0;
};

inline Separation gold_separation(const TextualEmbeddingFile& f, const AlignmentTask& task) {
  Separation s;
  std::size_t n_gold = 0, n_random = 0;
  for (const auto& p : task.test_ills) {
    auto a = f.rows.find(p.source);
    if (a == f.rows.end()) continue;
    for (const auto& q : task.test_ills) {
      auto b = f.rows.find(q.target);
      if (b == f.rows.end()) continue;
      double d = 0.0;
      for (std::size_t c = 0; c < f.dim; ++c) d += std::fabs(a->second[c] - b->second[c]);
      if (q.target == p.target) {
        s.gold += d;
        ++n_gold;
      } else {
        s.random += d;
        ++n_random;
      }
    }
  }
  KGALIGN_CHECK(n_gold > 0 && n_random > 0, "no test pairs with text on both sides");
  s.gold /= static_cast<double>(n_gold);
  s.random /= static_cast<double>(n_random);
  return s;
}

}  // namespace kgalign
