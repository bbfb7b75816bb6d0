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

// Synthetic bilingual tasks with known ground truth.
//
// Every source entity gets a random type. Edges are Erdős–Rényi; an edge's
// relation label is a fixed random function of the (head type, tail type)
// pair, and an entity's attributes are the attribute set of its type. Feature
// rows therefore identify an entity's type and neighbourhood, never the
// entity itself, and topology has to do the rest. n_types = 0 draws from
// n_entities types, so features are close to unique.
//
// The target graph is a relabelled copy with optional noise.

#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "kgalign/common.hpp"
#include "kgalign/kg_data.hpp"

namespace kgalign {

struct SynthConfig {
  std::size_t n_entities = 200;
  std::size_t n_relations = 20;
  std::size_t n_attributes = 20;
  std::size_t n_types = 0;  // 0: one type per entity
  double attributes_per_entity = 2.0;  // expected attribute count of a type
  double edge_density = 0.02;          // probability of each unordered pair
  double structural_noise = 0.05;      // fraction of target edges rewired
  double feature_noise = 0.05;         // fraction of target incidences dropped
  double ill_fraction = 1.0;           // fraction of entities with a gold ILL
  std::uint64_t seed = 7;

  void validate() const {
    KGALIGN_CHECK(n_entities >= 2, "synthetic task needs at least two entities");
    KGALIGN_CHECK(n_relations >= 1 && n_attributes >= 1, "need at least one relation and one attribute type");
    for (double r : {edge_density, structural_noise, feature_noise, ill_fraction})
      KGALIGN_CHECK(r >= 0.0 && r <= 1.0, "synthetic ratios must lie in [0,1], got ", r);
    KGALIGN_CHECK(attributes_per_entity >= 0.0 && attributes_per_entity <= static_cast<double>(n_attributes),
                  "attributes per entity must lie in [0, n_attributes]");
  }
};

// Source entity i has raw id i; its counterpart has raw id n + perm[i].
// Target edges keep their relation label unless feature noise resamples it
// (which removes the original relation incidence); a rewired edge moves to a
// uniformly random free slot.
inline RawDataset generate_raw(const SynthConfig& config) {
  config.validate();
  const std::size_t n = config.n_entities;
  Rng rng(mix_seed(config.seed, 0x5e7));

  RawDataset raw;
  for (std::size_t i = 0; i < n; ++i) {
    raw.source.entities.emplace_back(static_cast<std::int64_t>(i), str_cat("synth:src/", i));
    raw.target.entities.emplace_back(static_cast<std::int64_t>(n + i), str_cat("synth:tgt/", i));
  }

  const std::size_t n_types = config.n_types ? config.n_types : n;
  std::vector<std::size_t> type(n);
  for (auto& t : type) t = uniform_index(rng, n_types);
  const std::uint64_t label_salt = rng();
  auto relation_of = [&](std::size_t head, std::size_t tail) {
    return static_cast<std::int64_t>(mix_seed(mix_seed(label_salt, type[head]), type[tail]) % config.n_relations);
  };
  const double p_attr = config.attributes_per_entity / static_cast<double>(config.n_attributes);
  std::vector<std::vector<std::int64_t>> type_attrs(n_types);
  for (auto& attrs : type_attrs)
    for (std::size_t a = 0; a < config.n_attributes; ++a)
      if (uniform01(rng) < p_attr) attrs.push_back(static_cast<std::int64_t>(a));

  struct Edge {
    std::size_t head, tail;
    std::int64_t relation;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (uniform01(rng) >= config.edge_density) continue;
      if (uniform01(rng) < 0.5)
        edges.push_back({i, j, relation_of(i, j)});
      else
        edges.push_back({j, i, relation_of(j, i)});
    }
  }
  KGALIGN_CHECK(!edges.empty(), "edge density ", config.edge_density, " produced no edges for n=", n);

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  shuffle(perm, rng);

  for (const auto& e : edges) raw.source.triples.push_back({static_cast<std::int64_t>(e.head), e.relation,
                                                            static_cast<std::int64_t>(e.tail)});
  for (std::size_t i = 0; i < n; ++i)
    for (auto a : type_attrs[type[i]]) raw.source.attributes.emplace_back(static_cast<std::int64_t>(i), a);

  // Target edges: copy or rewire, never producing duplicate unordered pairs.
  std::set<std::pair<std::size_t, std::size_t>> taken;
  auto key = [](std::size_t a, std::size_t b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  std::vector<bool> rewire(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    rewire[k] = uniform01(rng) < config.structural_noise;
    if (!rewire[k]) taken.insert(key(perm[edges[k].head], perm[edges[k].tail]));
  }
  const std::size_t max_edges = n * (n - 1) / 2;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    std::size_t h = perm[edges[k].head], t = perm[edges[k].tail];
    if (rewire[k] && taken.size() < max_edges) {
      do {
        h = uniform_index(rng, n);
        t = uniform_index(rng, n - 1);
        if (t >= h) ++t;
      } while (taken.count(key(h, t)));
      taken.insert(key(h, t));
    }
    std::int64_t rel = edges[k].relation;
    if (uniform01(rng) < config.feature_noise) rel = static_cast<std::int64_t>(uniform_index(rng, config.n_relations));
    raw.target.triples.push_back({static_cast<std::int64_t>(n + h), rel, static_cast<std::int64_t>(n + t)});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (auto a : type_attrs[type[i]])
      if (!(uniform01(rng) < config.feature_noise))
        raw.target.attributes.emplace_back(static_cast<std::int64_t>(n + perm[i]), a);

  std::vector<std::size_t> linked(n);
  for (std::size_t i = 0; i < n; ++i) linked[i] = i;
  shuffle(linked, rng);
  linked.resize(static_cast<std::size_t>(std::llround(config.ill_fraction * static_cast<double>(n))));
  std::sort(linked.begin(), linked.end());
  for (std::size_t i : linked)
    raw.ills.emplace_back(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n + perm[i]));
  KGALIGN_CHECK(!raw.ills.empty(), "ill fraction ", config.ill_fraction, " produced no ILLs");
  return raw;
}

inline AlignmentTask generate(const SynthConfig& config, double split_fraction = 0.3) {
  return build_task(generate_raw(config), split_fraction, config.seed);
}

}  // namespace kgalign
