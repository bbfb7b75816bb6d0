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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <set>

#include "kgalign/common.hpp"

namespace kgalign {
namespace {

TEST(Common, MixSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s)
    for (std::uint64_t t = 0; t < 50; ++t) seen.insert(mix_seed(s, t));
  EXPECT_EQ(seen.size(), 2500u);
  EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
}

TEST(Common, UniformIndexStaysInRangeAndCoversIt) {
  Rng rng(1);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) {
    auto v = uniform_index(rng, 7);
    ASSERT_LT(v, 7u);
    ++hist[v];
  }
  for (int h : hist) EXPECT_GT(h, 800);
}

TEST(Common, Uniform01IsHalfOpen) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Common, ShuffleIsAPermutationAndSeeded) {
  std::vector<int> a(100), b;
  for (int i = 0; i < 100; ++i) a[i] = i;
  b = a;
  Rng r1(9), r2(9);
  shuffle(a, r1);
  shuffle(b, r2);
  EXPECT_EQ(a, b);
  std::set<int> s(a.begin(), a.end());
  EXPECT_EQ(s.size(), 100u);
}

TEST(Common, BinaryRoundTrip) {
  BinaryWriter w;
  w.bytes("MAGIC!");
  w.u32(3);
  w.u8(250);
  w.u64(1ULL << 40);
  w.i64(-17);
  w.f64(-0.1);
  w.str("héllo");
  w.array(std::vector<std::int64_t>{5, -6, 7});
  BinaryReader r(w.data(), "mem");
  r.expect_magic("MAGIC!", 3);
  EXPECT_EQ(r.u8(), 250);
  EXPECT_EQ(r.u64(), 1ULL << 40);
  EXPECT_EQ(r.i64(), -17);
  EXPECT_EQ(r.f64(), -0.1);
  EXPECT_EQ(r.str(), "héllo");
  EXPECT_EQ(r.array<std::int64_t>(), (std::vector<std::int64_t>{5, -6, 7}));
  EXPECT_TRUE(r.at_end());
}

TEST(Common, BinaryIsLittleEndian) {
  BinaryWriter w;
  w.u32(0x01020304);
  ASSERT_EQ(w.data().size(), 4u);
  EXPECT_EQ(static_cast<unsigned char>(w.data()[0]), 0x04);
  EXPECT_EQ(static_cast<unsigned char>(w.data()[3]), 0x01);
}

TEST(Common, BinaryReaderRejectsBadInput) {
  BinaryWriter w;
  w.bytes("KGTASK");
  w.u32(99);
  {
    BinaryReader r(w.data(), "mem");
    EXPECT_THROW(r.expect_magic("KGTASK", 1), Error);
  }
  {
    BinaryReader r(w.data(), "mem");
    EXPECT_THROW(r.expect_magic("KGFEAT", 99), Error);
  }
  {
    BinaryReader r(std::string("ab"), "mem");
    EXPECT_THROW(r.u32(), Error);
  }
  {
    BinaryWriter big;
    big.u64(1ULL << 60);  // array length far beyond the buffer
    BinaryReader r(big.data(), "mem");
    EXPECT_THROW(r.array<std::int64_t>(), Error);
  }
}

TEST(Common, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
}

TEST(Common, ParseInt) {
  std::int64_t v;
  EXPECT_TRUE(parse_int("42", v));
  EXPECT_EQ(v, 42);
  EXPECT_TRUE(parse_int("-3", v));
  EXPECT_EQ(v, -3);
  EXPECT_FALSE(parse_int("", v));
  EXPECT_FALSE(parse_int("4x", v));
  EXPECT_FALSE(parse_int(" 4", v));
  EXPECT_FALSE(parse_int("99999999999999999999", v));
}

TEST(Common, ParseAndFormatDoubleRoundTrip) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    double x = uniform_real(rng, -1e6, 1e6) * std::pow(10.0, static_cast<int>(uniform_index(rng, 20)) - 10);
    double y;
    ASSERT_TRUE(parse_double(format_double(x), y));
    ASSERT_EQ(x, y);
  }
  double y;
  EXPECT_FALSE(parse_double("nan", y));
  EXPECT_FALSE(parse_double("1.5e", y));
  EXPECT_FALSE(parse_double("", y));
}

TEST(Common, SplitKeepsEmptyFields) {
  auto f = split("a\t\tb", '\t');
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[1], "");
  EXPECT_EQ(strip_cr("x\r"), "x");
}

TEST(Common, AtomicWriteReplacesFile) {
  auto dir = std::filesystem::temp_directory_path() / "kgalign_common_test";
  std::filesystem::create_directories(dir);
  auto p = dir / "f.txt";
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  EXPECT_EQ(read_file(p), "two");
  EXPECT_THROW(read_file(dir / "missing"), Error);
  std::filesystem::remove_all(dir);
}

TEST(Common, ThreadCapFromEnvironment) {
  ::setenv("KGALIGN_THREADS", "1", 1);
  EXPECT_EQ(max_threads(), 1u);
  ::unsetenv("KGALIGN_THREADS");
  EXPECT_GE(max_threads(), 1u);
}

TEST(Common, ParallelRowsCoversEveryRowOnce) {
  std::vector<int> hit(5000, 0);
  parallel_rows(hit.size(), 1000, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hit[i];
  });
  for (int h : hit) ASSERT_EQ(h, 1);
}

}  // namespace
}  // namespace kgalign
