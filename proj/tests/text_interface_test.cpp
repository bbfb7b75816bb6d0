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

// The description encoder runs outside this project; these tests pin the
// files exchanged with it, using checked-in samples of its outputs.

#include <gtest/gtest.h>

#include <filesystem>

#include "kgalign/evaluator.hpp"
#include "kgalign/fusion.hpp"
#include "kgalign/kg_data.hpp"
#include "kgalign/text_interface.hpp"

namespace kgalign {
namespace {

namespace fs = std::filesystem;
const fs::path kData = KGALIGN_TEST_DATA;

AlignmentTask tiny() { return load_task(kData / "tiny", 0.4, 7); }

TEST(TextInterface, SampleEmbeddingsConform) {
  AlignmentTask t = tiny();
  auto f = parse_embedding_tsv(read_file(kData / "text" / "text_emb.tsv"));
  EXPECT_EQ(f.dim, kTextEmbeddingDim);
  EXPECT_TRUE(check_text_embeddings(f, t).empty());
  for (const auto& [id, row] : f.rows) EXPECT_EQ(row.size(), 300u);
  auto sep = gold_separation(f, t);
  EXPECT_LT(sep.gold, sep.random);
  // One entity has no description: fusion zero-fills it.
  EmbeddingMatrix g(t.total(), 4, 1.0);
  EXPECT_EQ(weighted_concat(g, f, 0.8).missing_text_rows, 1u);
}

TEST(TextInterface, NonConformingEmbeddingsAreReported) {
  AlignmentTask t = tiny();
  TextualEmbeddingFile f{4, {{0, {1, 2, 3, 4}}, {42, {1, 2, 3, 4}}}};
  auto problems = check_text_embeddings(f, t);
  ASSERT_EQ(problems.size(), 2u);
  EXPECT_NE(problems[0].find("dimension 4"), std::string::npos);
  EXPECT_NE(problems[1].find("entity 42"), std::string::npos);
}

TEST(TextInterface, SampleScoresCoverAnyTestPool) {
  AlignmentTask t = tiny();
  auto scores = parse_scores(read_file(kData / "text" / "scores.tsv"));
  for (const auto& [pair, s] : scores.entries) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
  EmbeddingMatrix e(t.total(), 1);
  for (std::size_t i = 0; i < t.total(); ++i) e(i, 0) = static_cast<double>(i % 3);
  CandidatePool pool = top_q_candidates(e, t, 3);
  EXPECT_TRUE(check_scores(scores, pool).empty());
  auto r = rerank(pool, scores, t, {1});
  EXPECT_DOUBLE_EQ(r.hits.at(1), pool_recall(pool, t));  // gold pairs score highest
  ScoreFile partial = scores;
  partial.entries.erase({pool.queries[0], pool.candidates[0][0]});
  EXPECT_EQ(check_scores(partial, pool).size(), 1u);
}

TEST(TextInterface, DescriptionsRoundTrip) {
  auto c = parse_descriptions(read_file(kData / "text" / "descriptions_src.tsv"));
  ASSERT_EQ(c.text.size(), 5u);
  EXPECT_EQ(c.text.at(1), "Entity B is a place in the source language.");
  EXPECT_EQ(parse_descriptions(format_descriptions(c)), c);
  EXPECT_THROW(parse_descriptions("x\ttext\n"), Error);
  EXPECT_THROW(parse_descriptions("1\ta\n1\tb\n"), Error);
  EXPECT_THROW(format_descriptions(DescriptionCorpus{{{1, "tab\there"}}}), Error);
  // Text after the first tab is kept verbatim, UTF-8 included.
  EXPECT_EQ(parse_descriptions("3\t北京\tcapital\n").text.at(3), "北京\tcapital");
}

TEST(TextInterface, TrainIllsFile) {
  AlignmentTask t = tiny();
  std::string text = format_ills(t.train_ills);
  EXPECT_EQ(parse_ills(text), t.train_ills);
  EXPECT_THROW(parse_ills("1\n"), Error);
}

TEST(TextInterface, EncoderConfigPinsTheWidth) {
  EncoderConfig c;
  EXPECT_NO_THROW(c.validate());
  c.output_dim = 768;
  EXPECT_THROW(c.validate(), Error);
  c = EncoderConfig{};
  c.margin = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace kgalign
