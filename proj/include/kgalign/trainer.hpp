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
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "kgalign/common.hpp"
#include "kgalign/features.hpp"
#include "kgalign/kg_data.hpp"
#include "kgalign/linalg.hpp"
#include "kgalign/models.hpp"

namespace kgalign {

struct TrainConfig {
  ModelConfig model;
  double margin = 3.0;
  std::size_t epochs = 50000;
  double learning_rate = 0.01;
  std::size_t negatives = 5;  // per positive and corruption side
  std::size_t resample_interval = 10;
  std::uint64_t seed = 7;
  ChannelSet drop = ChannelSet::none();

  static TrainConfig defaults(Variant variant) {
    TrainConfig c;
    c.model.variant = variant;
    if (variant == Variant::kMan) {
      c.epochs = 2000;
      c.learning_rate = 1.0;
    } else {
      c.epochs = 50000;
      c.learning_rate = 0.01;
    }
    return c;
  }

  void validate() const {
    KGALIGN_CHECK(margin > 0.0, "margin must be positive, got ", margin);
    KGALIGN_CHECK(negatives >= 1, "need at least one negative per positive");
    KGALIGN_CHECK(resample_interval >= 1, "resample interval must be at least one epoch");
    KGALIGN_CHECK(learning_rate >= 0.0 && std::isfinite(learning_rate), "invalid learning rate ", learning_rate);
  }
};

struct NegativeSample {
  std::size_t positive = 0;  // index into the positive list
  EntityPair pair;
};

// For every positive (e1, e2): `k` pairs with e1 replaced by a random source
// entity, then `k` pairs with e2 replaced by a random target entity. A
// corrupted entity is never the gold one; since every entity sits in at most
// one ILL, no corrupted pair is itself a training ILL.
struct NegativePool {
  std::size_t k = 0;
  std::vector<NegativeSample> samples;
};

inline NegativePool sample_negatives(const AlignmentTask& task, const std::vector<EntityPair>& positives,
                                     std::size_t k, Rng& rng) {
  KGALIGN_CHECK(k >= 1, "need at least one negative per positive");
  KGALIGN_CHECK(task.source.entity_count >= 2 && task.target.entity_count >= 2,
                "negative sampling needs at least two entities per graph");
  NegativePool pool;
  pool.k = k;
  pool.samples.reserve(positives.size() * 2 * k);
  const std::size_t n_src = task.source.entity_count, n_tgt = task.target.entity_count;
  for (std::size_t p = 0; p < positives.size(); ++p) {
    const EntityPair gold = positives[p];
    for (std::size_t i = 0; i < k; ++i) {
      // Draw from the n-1 non-gold entities.
      EntityId e = uniform_index(rng, n_src - 1);
      if (e >= gold.source) ++e;
      pool.samples.push_back({p, {e, gold.target}});
    }
    for (std::size_t i = 0; i < k; ++i) {
      EntityId e = uniform_index(rng, n_tgt - 1) + task.offset();
      if (e >= gold.target) ++e;
      pool.samples.push_back({p, {gold.source, e}});
    }
  }
  return pool;
}

inline NegativePool sample_negatives(const AlignmentTask& task, std::size_t k, Rng& rng) {
  return sample_negatives(task, task.train_ills, k, rng);
}

struct LossResult {
  double loss = 0.0;
  DenseMatrix grad;  // dLoss/dEmbedding, same shape as the embedding
  std::size_t terms = 0;
  std::size_t active_terms = 0;
};

// Sum over (positive, negative) of [ρ(pos) + β − ρ(neg)]₊ with ρ the ℓ1
// distance. A term is active only when strictly positive; sign(0) = 0.
inline LossResult margin_loss(const EmbeddingMatrix& emb, const std::vector<EntityPair>& positives,
                              const NegativePool& negatives, double margin) {
  LossResult res;
  res.grad = DenseMatrix(emb.rows(), emb.cols());
  res.terms = negatives.samples.size();
  auto check_pair = [&](const EntityPair& p) {
    KGALIGN_CHECK(p.source < emb.rows() && p.target < emb.rows(), "pair (", p.source, ",", p.target,
                  ") outside the embedding table of ", emb.rows(), " rows");
  };
  std::vector<double> pos_dist(positives.size());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    check_pair(positives[i]);
    pos_dist[i] = l1_distance(emb.row(positives[i].source), emb.row(positives[i].target));
  }
  auto add_sign_grad = [&](const EntityPair& p, double scale) {
    auto a = emb.row(p.source), b = emb.row(p.target);
    auto ga = res.grad.row(p.source), gb = res.grad.row(p.target);
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double diff = a[c] - b[c];
      const double s = diff > 0.0 ? scale : (diff < 0.0 ? -scale : 0.0);
      ga[c] += s;
      gb[c] -= s;
    }
  };
  for (const auto& neg : negatives.samples) {
    KGALIGN_CHECK(neg.positive < positives.size(), "negative refers to positive ", neg.positive);
    check_pair(neg.pair);
    const double neg_dist = l1_distance(emb.row(neg.pair.source), emb.row(neg.pair.target));
    const double term = pos_dist[neg.positive] + margin - neg_dist;
    if (!(term > 0.0)) continue;
    res.loss += term;
    ++res.active_terms;
    add_sign_grad(positives[neg.positive], 1.0);
    add_sign_grad(neg.pair, -1.0);
  }
  return res;
}

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_curve;  // loss before the update of each epoch
  EmbeddingMatrix embeddings;      // after the final update
};

// Called after every epoch with (epoch, loss).
using EpochCallback = std::function<void(std::size_t, double)>;

// Full-batch SGD on the margin loss. Each step moves by the gradient of the
// mean hinge term (J divided by the number of terms); the loss curve records
// J itself. Negatives are resampled every `resample_interval` epochs.
inline TrainResult train(const AlignmentTask& task, const FeatureSet& feats, const TrainConfig& config,
                         const EpochCallback& on_epoch = {}) {
  config.validate();
  KGALIGN_CHECK(!task.train_ills.empty(), "task has no training ILLs");
  KGALIGN_CHECK(feats.entity_count == task.total(), "features cover ", feats.entity_count,
                " entities, task has ", task.total());
  FeatureSet active = ablate(feats, config.drop);
  ModelConfig model_cfg = config.model;
  model_cfg.channels = active.active;

  GraphInputs inputs = GraphInputs::build(task, active);
  TrainResult out;
  out.params = init_params(model_cfg, active, config.seed);

  // Canonical order makes the run independent of how the ILLs were listed.
  std::vector<EntityPair> positives = task.train_ills;
  std::sort(positives.begin(), positives.end());

  NegativePool pool;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch % config.resample_interval == 0) {
      Rng rng(mix_seed(config.seed, 0x10000 + epoch / config.resample_interval));
      pool = sample_negatives(task, positives, config.negatives, rng);
    }
    ForwardCache fc = forward(out.params, inputs);
    LossResult loss = margin_loss(fc.output, positives, pool, config.margin);
    if (!std::isfinite(loss.loss))
      fail("non-finite loss at epoch ", epoch + 1, " (learning rate ", config.learning_rate, ")");
    out.loss_curve.push_back(loss.loss);
    if (on_epoch) on_epoch(epoch + 1, loss.loss);
    if (config.learning_rate == 0.0 || loss.active_terms == 0) continue;

    ModelParams grads = backward(out.params, inputs, fc, loss.grad);
    const double step = config.learning_rate / static_cast<double>(loss.terms);
    std::vector<DenseMatrix*> grad_tensors;
    grads.for_each_tensor([&](const std::string&, DenseMatrix& g) { grad_tensors.push_back(&g); });
    std::size_t i = 0;
    out.params.for_each_tensor([&](const std::string& name, DenseMatrix& w) {
      axpy(-step, *grad_tensors[i++], w);
      if (!all_finite(w))
        fail("non-finite parameter ", name, " at epoch ", epoch + 1, " (learning rate ", config.learning_rate, ")");
    });
  }
  out.embeddings = embed(out.params, inputs);
  return out;
}

}  // namespace kgalign
