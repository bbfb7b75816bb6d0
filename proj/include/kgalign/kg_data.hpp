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

// Ingestion of DBP-style bilingual knowledge graphs.
//
// An input directory holds seven tab-separated files:
//
//   ent_ids_1, ent_ids_2   <int id>\t<uri>
//   triples_1, triples_2   <head id>\t<relation id>\t<tail id>
//   attrs_1, attrs_2       <entity id>\t<attribute id>
//   ill_ent_ids            <source id>\t<target id>
//
// Raw entity ids are re-mapped to dense ids in ascending raw-id order, so the
// resulting task never depends on the line order of the input files. Within
// a task the two graphs share one id space: source entities occupy
// [0, offset) and target entities [offset, total).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgalign/common.hpp"

namespace kgalign {

using EntityId = std::size_t;
using RelationId = std::int64_t;
using AttributeId = std::int64_t;

struct EntityPair {
  EntityId source = 0;
  EntityId target = 0;
  auto operator<=>(const EntityPair&) const = default;
};

// A relation triple in graph-local ids. Duplicate input lines collapse into
// one triple whose multiplicity is kept in `count`.
struct RelationTriple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;
  std::uint64_t count = 1;
  bool operator==(const RelationTriple&) const = default;
};

struct AttributeTriple {
  EntityId head = 0;
  AttributeId attribute = 0;
  std::uint64_t count = 1;
  bool operator==(const AttributeTriple&) const = default;
};

struct LanguageGraph {
  std::string language_tag;
  std::size_t entity_count = 0;
  std::vector<RelationTriple> relation_triples;    // sorted by (head, relation, tail)
  std::vector<AttributeTriple> attribute_triples;  // sorted by (head, attribute)
  std::vector<std::int64_t> raw_ids;               // local id -> id in the input files
  std::vector<std::string> uris;                   // local id -> uri

  bool operator==(const LanguageGraph&) const = default;
};

struct AlignmentTask {
  LanguageGraph source;
  LanguageGraph target;
  // Pairs in combined ids: first < offset() <= second.
  std::vector<EntityPair> train_ills;
  std::vector<EntityPair> test_ills;
  double split_fraction = 0.3;
  std::uint64_t seed = 0;

  std::size_t offset() const { return source.entity_count; }
  std::size_t total() const { return source.entity_count + target.entity_count; }
  bool is_source(EntityId id) const { return id < offset(); }

  // Relation edges of both graphs in combined ids (one per distinct triple).
  std::vector<std::pair<std::size_t, std::size_t>> combined_edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(source.relation_triples.size() + target.relation_triples.size());
    for (const auto& t : source.relation_triples) edges.emplace_back(t.head, t.tail);
    for (const auto& t : target.relation_triples) edges.emplace_back(t.head + offset(), t.tail + offset());
    return edges;
  }

  // Raw input id of a combined entity id.
  std::int64_t raw_id(EntityId id) const {
    return is_source(id) ? source.raw_ids.at(id) : target.raw_ids.at(id - offset());
  }

  bool operator==(const AlignmentTask&) const = default;
};

// (offset, total) of the disjoint-union id space.
inline std::pair<std::size_t, std::size_t> disjoint_union_ids(const AlignmentTask& task) {
  return {task.offset(), task.total()};
}

// ---------------------------------------------------------------------------
// Raw file contents, before id re-mapping. Shared by the file loader and the
// synthetic generator.

struct RawGraph {
  std::vector<std::pair<std::int64_t, std::string>> entities;
  std::vector<std::array<std::int64_t, 3>> triples;
  std::vector<std::pair<std::int64_t, std::int64_t>> attributes;
};

struct RawDataset {
  RawGraph source;
  RawGraph target;
  std::vector<std::pair<std::int64_t, std::int64_t>> ills;
};

namespace detail {

template <typename LineFn>
void for_each_line(const std::filesystem::path& path, LineFn&& fn) {
  std::ifstream in(path);
  if (!in) fail("cannot open ", path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = strip_cr(line);
    if (sv.empty()) continue;
    fn(sv, lineno);
  }
}

inline std::vector<std::int64_t> parse_ints(std::string_view line, std::size_t expected,
                                            const std::filesystem::path& path, std::size_t lineno) {
  auto fields = split(line, '\t');
  if (fields.size() != expected)
    fail(path.string(), ":", lineno, ": expected ", expected, " tab-separated fields, got ", fields.size());
  std::vector<std::int64_t> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    if (!parse_int(fields[i], out[i]) || out[i] < 0)
      fail(path.string(), ":", lineno, ": malformed id '", std::string(fields[i]), "'");
  }
  return out;
}

inline RawGraph read_raw_graph(const std::filesystem::path& dir, int which) {
  RawGraph g;
  const auto suffix = std::to_string(which);
  auto ent_path = dir / ("ent_ids_" + suffix);
  for_each_line(ent_path, [&](std::string_view line, std::size_t lineno) {
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) fail(ent_path.string(), ":", lineno, ": expected <id>\\t<uri>");
    std::int64_t id;
    if (!parse_int(line.substr(0, tab), id) || id < 0)
      fail(ent_path.string(), ":", lineno, ": malformed id '", std::string(line.substr(0, tab)), "'");
    g.entities.emplace_back(id, std::string(line.substr(tab + 1)));
  });
  auto tri_path = dir / ("triples_" + suffix);
  for_each_line(tri_path, [&](std::string_view line, std::size_t lineno) {
    auto v = parse_ints(line, 3, tri_path, lineno);
    g.triples.push_back({v[0], v[1], v[2]});
  });
  auto attr_path = dir / ("attrs_" + suffix);
  for_each_line(attr_path, [&](std::string_view line, std::size_t lineno) {
    auto v = parse_ints(line, 2, attr_path, lineno);
    g.attributes.emplace_back(v[0], v[1]);
  });
  return g;
}

inline LanguageGraph build_graph(const RawGraph& raw, std::string tag) {
  LanguageGraph g;
  g.language_tag = std::move(tag);
  KGALIGN_CHECK(!raw.entities.empty(), "graph '", g.language_tag, "' has no entities");

  auto ents = raw.entities;
  std::sort(ents.begin(), ents.end());
  std::unordered_map<std::int64_t, EntityId> dense;
  dense.reserve(ents.size());
  for (const auto& [id, uri] : ents) {
    if (!dense.emplace(id, g.raw_ids.size()).second)
      fail("graph '", g.language_tag, "': duplicate entity id ", id);
    g.raw_ids.push_back(id);
    g.uris.push_back(uri);
  }
  g.entity_count = g.raw_ids.size();

  auto lookup = [&](std::int64_t raw_id, const char* what) {
    auto it = dense.find(raw_id);
    if (it == dense.end()) fail("graph '", g.language_tag, "': ", what, " references unknown entity id ", raw_id);
    return it->second;
  };

  std::map<std::tuple<EntityId, RelationId, EntityId>, std::uint64_t> rel_counts;
  for (const auto& t : raw.triples)
    ++rel_counts[{lookup(t[0], "relation triple"), t[1], lookup(t[2], "relation triple")}];
  for (const auto& [key, count] : rel_counts)
    g.relation_triples.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), count});

  std::map<std::pair<EntityId, AttributeId>, std::uint64_t> attr_counts;
  for (const auto& [e, a] : raw.attributes) ++attr_counts[{lookup(e, "attribute triple"), a}];
  for (const auto& [key, count] : attr_counts) g.attribute_triples.push_back({key.first, key.second, count});
  return g;
}

}  // namespace detail

inline RawDataset read_raw_dataset(const std::filesystem::path& dir) {
  KGALIGN_CHECK(std::filesystem::is_directory(dir), "not a directory: ", dir.string());
  RawDataset raw;
  raw.source = detail::read_raw_graph(dir, 1);
  raw.target = detail::read_raw_graph(dir, 2);
  auto ill_path = dir / "ill_ent_ids";
  detail::for_each_line(ill_path, [&](std::string_view line, std::size_t lineno) {
    auto v = detail::parse_ints(line, 2, ill_path, lineno);
    raw.ills.emplace_back(v[0], v[1]);
  });
  if (raw.ills.empty()) fail(ill_path.string(), ": no ILLs");
  return raw;
}

// Builds the task from raw contents and splits the ILLs: a uniformly random
// round(split_fraction * |ILL|) of them become training pairs.
inline AlignmentTask build_task(const RawDataset& raw, double split_fraction, std::uint64_t seed) {
  KGALIGN_CHECK(split_fraction > 0.0 && split_fraction < 1.0, "split fraction must lie in (0,1), got ",
                split_fraction);
  AlignmentTask task;
  task.split_fraction = split_fraction;
  task.seed = seed;
  task.source = detail::build_graph(raw.source, "src");
  task.target = detail::build_graph(raw.target, "tgt");
  KGALIGN_CHECK(!raw.ills.empty(), "no ILLs");

  auto index_of = [](const LanguageGraph& g) {
    std::unordered_map<std::int64_t, EntityId> m;
    for (EntityId i = 0; i < g.raw_ids.size(); ++i) m.emplace(g.raw_ids[i], i);
    return m;
  };
  auto src_index = index_of(task.source);
  auto tgt_index = index_of(task.target);

  std::vector<EntityPair> ills;
  for (const auto& [s, t] : raw.ills) {
    auto si = src_index.find(s);
    if (si == src_index.end()) fail("ILL references unknown source entity id ", s);
    auto ti = tgt_index.find(t);
    if (ti == tgt_index.end()) fail("ILL references unknown target entity id ", t);
    ills.push_back({si->second, ti->second + task.offset()});
  }
  std::sort(ills.begin(), ills.end());
  ills.erase(std::unique(ills.begin(), ills.end()), ills.end());
  {
    std::vector<char> seen(task.total(), 0);
    for (const auto& p : ills) {
      for (EntityId e : {p.source, p.target}) {
        if (seen[e]) fail("entity id ", task.raw_id(e), " appears in more than one ILL");
        seen[e] = 1;
      }
    }
  }

  const auto n = static_cast<long long>(ills.size());
  const long long n_train = std::llround(split_fraction * static_cast<double>(n));
  KGALIGN_CHECK(n_train >= 1 && n_train < n, "split ", split_fraction, " of ", n,
                " ILLs leaves an empty train or test set");
  Rng rng(mix_seed(seed, 0x5b1));
  shuffle(ills, rng);
  task.train_ills.assign(ills.begin(), ills.begin() + n_train);
  task.test_ills.assign(ills.begin() + n_train, ills.end());
  std::sort(task.train_ills.begin(), task.train_ills.end());
  std::sort(task.test_ills.begin(), task.test_ills.end());
  return task;
}

inline AlignmentTask load_task(const std::filesystem::path& dir, double split_fraction, std::uint64_t seed) {
  return build_task(read_raw_dataset(dir), split_fraction, seed);
}

// Writes the raw contents back out in the input directory layout.
inline void write_raw_dataset(const RawDataset& raw, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write_graph = [&](const RawGraph& g, const std::string& suffix) {
    std::string ents, tris, attrs;
    for (const auto& [id, uri] : g.entities) ents += str_cat(id, '\t', uri, '\n');
    for (const auto& t : g.triples) tris += str_cat(t[0], '\t', t[1], '\t', t[2], '\n');
    for (const auto& [e, a] : g.attributes) attrs += str_cat(e, '\t', a, '\n');
    write_file_atomic(dir / ("ent_ids_" + suffix), ents);
    write_file_atomic(dir / ("triples_" + suffix), tris);
    write_file_atomic(dir / ("attrs_" + suffix), attrs);
  };
  write_graph(raw.source, "1");
  write_graph(raw.target, "2");
  std::string ills;
  for (const auto& [s, t] : raw.ills) ills += str_cat(s, '\t', t, '\n');
  write_file_atomic(dir / "ill_ent_ids", ills);
}

// ---------------------------------------------------------------------------
// Binary task cache: "KGTASK" + u32 version, then both graphs and the split.

inline constexpr std::uint32_t kTaskFormatVersion = 1;

namespace detail {

inline void write_graph(BinaryWriter& w, const LanguageGraph& g) {
  w.str(g.language_tag);
  w.u64(g.entity_count);
  w.array(g.raw_ids);
  for (const auto& uri : g.uris) w.str(uri);
  w.u64(g.relation_triples.size());
  for (const auto& t : g.relation_triples) {
    w.u64(t.head);
    w.i64(t.relation);
    w.u64(t.tail);
    w.u64(t.count);
  }
  w.u64(g.attribute_triples.size());
  for (const auto& t : g.attribute_triples) {
    w.u64(t.head);
    w.i64(t.attribute);
    w.u64(t.count);
  }
}

inline LanguageGraph read_graph(BinaryReader& r) {
  LanguageGraph g;
  g.language_tag = r.str();
  g.entity_count = r.u64();
  g.raw_ids = r.array<std::int64_t>();
  KGALIGN_CHECK(g.raw_ids.size() == g.entity_count, r.source(), ": entity count mismatch");
  for (std::size_t i = 0; i < g.entity_count; ++i) g.uris.push_back(r.str());
  std::size_t n = r.u64();
  for (std::size_t i = 0; i < n; ++i) {
    RelationTriple t;
    t.head = r.u64();
    t.relation = r.i64();
    t.tail = r.u64();
    t.count = r.u64();
    KGALIGN_CHECK(t.head < g.entity_count && t.tail < g.entity_count, r.source(), ": dangling triple");
    g.relation_triples.push_back(t);
  }
  n = r.u64();
  for (std::size_t i = 0; i < n; ++i) {
    AttributeTriple t;
    t.head = r.u64();
    t.attribute = r.i64();
    t.count = r.u64();
    KGALIGN_CHECK(t.head < g.entity_count, r.source(), ": dangling attribute triple");
    g.attribute_triples.push_back(t);
  }
  return g;
}

inline void write_pairs(BinaryWriter& w, const std::vector<EntityPair>& pairs) {
  w.u64(pairs.size());
  for (const auto& p : pairs) {
    w.u64(p.source);
    w.u64(p.target);
  }
}

inline std::vector<EntityPair> read_pairs(BinaryReader& r, std::size_t offset, std::size_t total) {
  std::vector<EntityPair> pairs(r.u64());
  for (auto& p : pairs) {
    p.source = r.u64();
    p.target = r.u64();
    KGALIGN_CHECK(p.source < offset && p.target >= offset && p.target < total, r.source(),
                  ": ILL outside the task id space");
  }
  return pairs;
}

}  // namespace detail

inline std::string serialize_task(const AlignmentTask& task) {
  BinaryWriter w;
  w.bytes("KGTASK");
  w.u32(kTaskFormatVersion);
  w.f64(task.split_fraction);
  w.u64(task.seed);
  detail::write_graph(w, task.source);
  detail::write_graph(w, task.target);
  detail::write_pairs(w, task.train_ills);
  detail::write_pairs(w, task.test_ills);
  return w.data();
}

inline AlignmentTask deserialize_task(BinaryReader& r) {
  r.expect_magic("KGTASK", kTaskFormatVersion);
  AlignmentTask task;
  task.split_fraction = r.f64();
  task.seed = r.u64();
  task.source = detail::read_graph(r);
  task.target = detail::read_graph(r);
  task.train_ills = detail::read_pairs(r, task.offset(), task.total());
  task.test_ills = detail::read_pairs(r, task.offset(), task.total());
  KGALIGN_CHECK(r.at_end(), r.source(), ": trailing bytes");
  return task;
}

inline void save_task(const AlignmentTask& task, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_task(task));
}

inline AlignmentTask load_task_cache(const std::filesystem::path& path) {
  auto r = BinaryReader::from_file(path);
  return deserialize_task(r);
}

}  // namespace kgalign
