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

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgalign/common.hpp"
#include "kgalign/kg_data.hpp"
#include "kgalign/linalg.hpp"

namespace kgalign {

inline constexpr std::size_t kDefaultTopF = 1000;

enum class Channel : std::uint8_t { kTopology = 1, kRelation = 2, kAttribute = 4 };

// A subset of {TE, RE, AE}.
class ChannelSet {
 public:
  constexpr ChannelSet() = default;
  static constexpr ChannelSet all() { return ChannelSet(7); }
  static constexpr ChannelSet none() { return ChannelSet(0); }

  constexpr bool contains(Channel c) const { return bits_ & static_cast<std::uint8_t>(c); }
  constexpr ChannelSet with(Channel c) const { return ChannelSet(bits_ | static_cast<std::uint8_t>(c)); }
  constexpr ChannelSet without(ChannelSet o) const { return ChannelSet(bits_ & ~o.bits_ & 7); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  static ChannelSet from_bits(std::uint8_t b) {
    KGALIGN_CHECK(b <= 7, "invalid channel bits ", int(b));
    return ChannelSet(b);
  }

  // "none", or a comma-separated list of te/re/ae.
  static ChannelSet parse(std::string_view text) {
    ChannelSet s;
    if (text == "none" || text.empty()) return s;
    for (auto tok : split(text, ',')) {
      if (tok == "te") {
        s = s.with(Channel::kTopology);
      } else if (tok == "re") {
        s = s.with(Channel::kRelation);
      } else if (tok == "ae") {
        s = s.with(Channel::kAttribute);
      } else {
        fail("unknown feature channel '", std::string(tok), "' (expected te, re, ae or none)");
      }
    }
    return s;
  }

  std::string to_string() const {
    if (bits_ == 0) return "none";
    std::string out;
    auto add = [&](Channel c, const char* name) {
      if (!contains(c)) return;
      if (!out.empty()) out += ',';
      out += name;
    };
    add(Channel::kTopology, "te");
    add(Channel::kRelation, "re");
    add(Channel::kAttribute, "ae");
    return out;
  }

  constexpr bool operator==(const ChannelSet&) const = default;

 private:
  constexpr explicit ChannelSet(std::uint8_t bits) : bits_(bits) {}
  std::uint8_t bits_ = 0;
};

// Raw input channels of the combined graph. The topology channel is the
// implicit identity and never materialized.
struct FeatureSet {
  std::size_t top_f = kDefaultTopF;
  std::size_t entity_count = 0;
  SparseMatrix relation_feats;   // N x |vocab_relations|, counts
  SparseMatrix attribute_feats;  // N x |vocab_attributes|, counts
  std::vector<RelationId> vocab_relations;    // column -> relation id
  std::vector<AttributeId> vocab_attributes;  // column -> attribute id
  ChannelSet active = ChannelSet::all();

  bool topo_identity() const { return active.contains(Channel::kTopology); }

  bool operator==(const FeatureSet&) const = default;
};

namespace detail {

// The top_f ids by descending frequency, ties by ascending id.
template <typename Id>
std::vector<Id> top_by_frequency(const std::map<Id, std::uint64_t>& freq, std::size_t top_f) {
  std::vector<std::pair<Id, std::uint64_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (items.size() > top_f) items.resize(top_f);
  std::vector<Id> out;
  for (const auto& [id, count] : items) out.push_back(id);
  return out;
}

}  // namespace detail

// Count-based N-hot features over a vocabulary shared by both graphs. A
// relation triple contributes to both its head and its tail; an attribute
// triple to its head. Duplicate triples count with their multiplicity.
inline FeatureSet build_features(const AlignmentTask& task, std::size_t top_f) {
  KGALIGN_CHECK(top_f >= 1, "top-F must be at least 1");
  FeatureSet fs;
  fs.top_f = top_f;
  fs.entity_count = task.total();

  std::map<RelationId, std::uint64_t> rel_freq;
  std::map<AttributeId, std::uint64_t> attr_freq;
  for (const LanguageGraph* g : {&task.source, &task.target}) {
    for (const auto& t : g->relation_triples) rel_freq[t.relation] += t.count;
    for (const auto& t : g->attribute_triples) attr_freq[t.attribute] += t.count;
  }
  fs.vocab_relations = detail::top_by_frequency(rel_freq, top_f);
  fs.vocab_attributes = detail::top_by_frequency(attr_freq, top_f);

  std::unordered_map<RelationId, std::size_t> rel_col;
  for (std::size_t j = 0; j < fs.vocab_relations.size(); ++j) rel_col[fs.vocab_relations[j]] = j;
  std::unordered_map<AttributeId, std::size_t> attr_col;
  for (std::size_t j = 0; j < fs.vocab_attributes.size(); ++j) attr_col[fs.vocab_attributes[j]] = j;

  std::vector<SparseMatrix::Triplet> rel_trips, attr_trips;
  auto add_graph = [&](const LanguageGraph& g, std::size_t off) {
    for (const auto& t : g.relation_triples) {
      auto it = rel_col.find(t.relation);
      if (it == rel_col.end()) continue;
      const double c = static_cast<double>(t.count);
      rel_trips.push_back({t.head + off, it->second, c});
      rel_trips.push_back({t.tail + off, it->second, c});
    }
    for (const auto& t : g.attribute_triples) {
      auto it = attr_col.find(t.attribute);
      if (it == attr_col.end()) continue;
      attr_trips.push_back({t.head + off, it->second, static_cast<double>(t.count)});
    }
  };
  add_graph(task.source, 0);
  add_graph(task.target, task.offset());
  fs.relation_feats = SparseMatrix::from_triplets(fs.entity_count, fs.vocab_relations.size(), std::move(rel_trips));
  fs.attribute_feats =
      SparseMatrix::from_triplets(fs.entity_count, fs.vocab_attributes.size(), std::move(attr_trips));
  return fs;
}

// Removes channels from downstream model construction.
inline FeatureSet ablate(const FeatureSet& features, ChannelSet drop) {
  FeatureSet out = features;
  out.active = features.active.without(drop);
  KGALIGN_CHECK(!out.active.empty(), "cannot drop every feature channel (te, re and ae)");
  return out;
}

// ---------------------------------------------------------------------------
// Binary cache: "KGFEAT" + u32 version.

inline constexpr std::uint32_t kFeatureFormatVersion = 1;

inline std::string serialize_features(const FeatureSet& fs) {
  BinaryWriter w;
  w.bytes("KGFEAT");
  w.u32(kFeatureFormatVersion);
  w.u64(fs.top_f);
  w.u64(fs.entity_count);
  w.u8(fs.active.bits());
  w.array(fs.vocab_relations);
  w.array(fs.vocab_attributes);
  write_sparse(w, fs.relation_feats);
  write_sparse(w, fs.attribute_feats);
  return w.data();
}

inline FeatureSet deserialize_features(BinaryReader& r) {
  r.expect_magic("KGFEAT", kFeatureFormatVersion);
  FeatureSet fs;
  fs.top_f = r.u64();
  fs.entity_count = r.u64();
  fs.active = ChannelSet::from_bits(r.u8());
  fs.vocab_relations = r.array<std::int64_t>();
  fs.vocab_attributes = r.array<std::int64_t>();
  fs.relation_feats = read_sparse(r);
  fs.attribute_feats = read_sparse(r);
  KGALIGN_CHECK(fs.relation_feats.rows() == fs.entity_count && fs.attribute_feats.rows() == fs.entity_count &&
                    fs.relation_feats.cols() == fs.vocab_relations.size() &&
                    fs.attribute_feats.cols() == fs.vocab_attributes.size(),
                r.source(), ": feature matrix shape mismatch");
  KGALIGN_CHECK(r.at_end(), r.source(), ": trailing bytes");
  return fs;
}

inline void save_features(const FeatureSet& fs, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_features(fs));
}

inline FeatureSet load_features(const std::filesystem::path& path) {
  auto r = BinaryReader::from_file(path);
  return deserialize_features(r);
}

}  // namespace kgalign
