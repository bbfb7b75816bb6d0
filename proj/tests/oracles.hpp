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

// Test-only reference implementations. They use plain nested vectors and
// textbook loops, and share no code path with the library kernels they
// check (only the library's data types are read).

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kgalign/kgalign.hpp"

namespace kgalign::oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, std::vector<double>(c, 0.0)); }

inline Mat from(const DenseMatrix& m) {
  Mat out = zeros(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m.data()[i * m.cols() + j];
  return out;
}

inline Mat from(const SparseMatrix& s) {
  Mat out = zeros(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t k = s.row_ptr()[i]; k < s.row_ptr()[i + 1]; ++k) out[i][s.col_idx()[k]] = s.values()[k];
  return out;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), inner = b.size();
  Mat out = zeros(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += a[i][k] * b[k][j];
      out[i][j] = acc;
    }
  return out;
}

inline Mat relu(Mat m) {
  for (auto& row : m)
    for (double& v : row) v = std::max(0.0, v);
  return m;
}

// D̃^{-1/2} (A + I) D̃^{-1/2} computed as three dense products.
inline Mat normalized_adjacency(const std::vector<std::pair<std::size_t, std::size_t>>& edges, std::size_t n) {
  Mat a = zeros(n, n);
  for (auto [i, j] : edges) {
    if (i == j) continue;
    a[i][j] = 1.0;
    a[j][i] = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) a[i][i] = 1.0;
  Mat d = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += a[i][j];
    d[i][i] = 1.0 / std::sqrt(deg);
  }
  return matmul(matmul(d, a), d);
}

// Counts by scanning every triple, keyed by raw ids.
struct FeatureCounts {
  std::map<std::pair<std::size_t, std::int64_t>, double> relation;   // (entity, relation id)
  std::map<std::pair<std::size_t, std::int64_t>, double> attribute;  // (entity, attribute id)
};

inline FeatureCounts count_features(const AlignmentTask& task) {
  FeatureCounts c;
  auto scan = [&](const LanguageGraph& g, std::size_t off) {
    for (const auto& t : g.relation_triples)
      for (std::uint64_t m = 0; m < t.count; ++m) {
        c.relation[{t.head + off, t.relation}] += 1.0;
        c.relation[{t.tail + off, t.relation}] += 1.0;
      }
    for (const auto& t : g.attribute_triples)
      for (std::uint64_t m = 0; m < t.count; ++m) c.attribute[{t.head + off, t.attribute}] += 1.0;
  };
  scan(task.source, 0);
  scan(task.target, task.offset());
  return c;
}

// Top-F ids by frequency, ties by ascending id, by repeated selection.
inline std::vector<std::int64_t> top_ids(const std::map<std::int64_t, double>& freq, std::size_t f) {
  std::map<std::int64_t, double> left = freq;
  std::vector<std::int64_t> out;
  while (out.size() < f && !left.empty()) {
    auto best = left.begin();
    for (auto it = left.begin(); it != left.end(); ++it)
      if (it->second > best->second) best = it;
    out.push_back(best->first);
    left.erase(best);
  }
  return out;
}

struct Term {
  std::size_t pos;
  EntityPair neg;
};

inline double l1(const Mat& e, std::size_t a, std::size_t b) {
  double d = 0.0;
  for (std::size_t c = 0; c < e[a].size(); ++c) d += std::fabs(e[a][c] - e[b][c]);
  return d;
}

// Scalar loop over every (term, coordinate).
inline std::pair<double, Mat> margin_loss(const Mat& e, const std::vector<EntityPair>& pos,
                                          const std::vector<Term>& terms, double beta) {
  double loss = 0.0;
  Mat grad = zeros(e.size(), e.empty() ? 0 : e[0].size());
  for (const auto& t : terms) {
    const EntityPair p = pos[t.pos];
    const double v = l1(e, p.source, p.target) + beta - l1(e, t.neg.source, t.neg.target);
    if (v <= 0.0) continue;
    loss += v;
    for (std::size_t c = 0; c < e[0].size(); ++c) {
      double dp = e[p.source][c] - e[p.target][c];
      double sp = dp > 0 ? 1.0 : (dp < 0 ? -1.0 : 0.0);
      grad[p.source][c] += sp;
      grad[p.target][c] -= sp;
      double dn = e[t.neg.source][c] - e[t.neg.target][c];
      double sn = dn > 0 ? 1.0 : (dn < 0 ? -1.0 : 0.0);
      grad[t.neg.source][c] -= sn;
      grad[t.neg.target][c] += sn;
    }
  }
  return {loss, grad};
}

// Full sort of the candidate list for one query; returns 1-based gold rank
// and the sorted list.
inline std::pair<std::size_t, std::vector<std::size_t>> rank_query(const Mat& e, std::size_t query, std::size_t gold,
                                                                   std::vector<std::size_t> cands) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t c : cands) scored.emplace_back(l1(e, query, c), c);
  std::sort(scored.begin(), scored.end());
  std::vector<std::size_t> order;
  std::size_t rank = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    order.push_back(scored[i].second);
    if (scored[i].second == gold) rank = i + 1;
  }
  return {rank, order};
}

// One GCN stack; `input` empty means featureless (identity).
inline Mat gcn(const Mat& adj, const Mat* input, const std::vector<Mat>& weights) {
  Mat h;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Mat x = (l == 0) ? (input ? *input : [&] {
      Mat id = zeros(adj.size(), adj.size());
      for (std::size_t i = 0; i < adj.size(); ++i) id[i][i] = 1.0;
      return id;
    }())
                     : h;
    h = relu(matmul(matmul(adj, x), weights[l]));
  }
  return h;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Highway encoder applied to each entity's own feature row, written per
// coordinate.
inline Mat highway(const Mat& x, const HighwayEncoder& enc, bool with_highway = true) {
  const Mat w1 = from(enc.w1), wt = from(enc.wt), w2 = from(enc.w2);
  const auto b1 = from(enc.b1)[0], bt = from(enc.bt)[0], b2 = from(enc.b2)[0];
  const std::size_t d = b1.size();
  Mat out = zeros(x.size(), d);
  for (std::size_t n = 0; n < x.size(); ++n) {
    std::vector<double> s(d), t(d), r(d);
    for (std::size_t j = 0; j < d; ++j) {
      double a = b1[j];
      for (std::size_t i = 0; i < x[n].size(); ++i) a += x[n][i] * w1[i][j];
      s[j] = std::max(0.0, a);
    }
    if (!with_highway) {
      out[n] = s;
      continue;
    }
    for (std::size_t j = 0; j < d; ++j) {
      double at = bt[j], a2 = b2[j];
      for (std::size_t i = 0; i < d; ++i) {
        at += s[i] * wt[i][j];
        a2 += s[i] * w2[i][j];
      }
      t[j] = sigmoid(at);
      r[j] = std::max(0.0, a2);
      out[n][j] = r[j] * t[j] + s[j] * (1.0 - t[j]);
    }
  }
  return out;
}

inline Mat concat(const std::vector<Mat>& blocks) {
  Mat out(blocks[0].size());
  for (const auto& b : blocks)
    for (std::size_t i = 0; i < b.size(); ++i) out[i].insert(out[i].end(), b[i].begin(), b[i].end());
  return out;
}

inline std::vector<Mat> weights_of(const GcnStack& s) {
  std::vector<Mat> out;
  for (const auto& w : s.weights) out.push_back(from(w));
  return out;
}

// Whole-model forward written directly from the layer formulas.
inline Mat model_forward(const ModelParams& p, const AlignmentTask& task, const FeatureSet& feats) {
  const Mat adj = normalized_adjacency(task.combined_edges(), task.total());
  const Mat xr = from(feats.relation_feats), xa = from(feats.attribute_feats);
  std::map<Channel, Mat> out;
  const auto& ch = p.config.channels;
  if (ch.contains(Channel::kTopology)) out[Channel::kTopology] = gcn(adj, nullptr, weights_of(p.topo_gcn));
  auto branch = [&](const Branch& b, const Mat& x) {
    if (auto* g = std::get_if<GcnStack>(&b)) return gcn(adj, &x, weights_of(*g));
    return highway(x, std::get<HighwayEncoder>(b), p.config.highway);
  };
  if (ch.contains(Channel::kRelation)) out[Channel::kRelation] = branch(p.relation_branch, xr);
  if (ch.contains(Channel::kAttribute)) out[Channel::kAttribute] = branch(p.attribute_branch, xa);
  std::vector<Mat> blocks;
  auto order = p.config.variant == Variant::kMan
                   ? std::vector<Channel>{Channel::kTopology, Channel::kAttribute, Channel::kRelation}
                   : std::vector<Channel>{Channel::kTopology, Channel::kRelation, Channel::kAttribute};
  for (Channel c : order)
    if (out.count(c)) blocks.push_back(out[c]);
  Mat h = concat(blocks);
  if (p.config.variant == Variant::kHman) {
    for (auto& row : h) {
      double ss = 0.0;
      for (double v : row) ss += v * v;
      if (ss > 0.0)
        for (double& v : row) v /= std::sqrt(ss);
    }
  }
  return h;
}

inline double max_rel_diff(const Mat& a, const DenseMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      const double x = a[i][j], y = b(i, j);
      const double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
      worst = std::max(worst, std::fabs(x - y) / scale);
    }
  return worst;
}

// Central finite differences of `loss` w.r.t. every entry of every tensor,
// compared against `analytic`. Entries where the one-sided slopes disagree
// sit on a kink of the piecewise-linear loss (ReLU, hinge or |.|), where no
// derivative exists; they are skipped and counted.
struct GradCheckReport {
  std::string worst_tensor;
  double worst_rel_error = 0.0;  // per tensor: ||a - n||_2 / max(||a||_2, ||n||_2)
  std::size_t checked = 0;
  std::size_t kinks = 0;
};

inline GradCheckReport check_gradients(ModelParams params, const ModelParams& analytic,
                                       const std::function<double(const ModelParams&)>& loss, double step = 1e-4) {
  GradCheckReport rep;
  std::vector<const DenseMatrix*> grads;
  analytic.for_each_tensor([&](const std::string&, const DenseMatrix& g) { grads.push_back(&g); });
  std::vector<std::pair<std::string, DenseMatrix*>> tensors;
  params.for_each_tensor([&](const std::string& name, DenseMatrix& w) { tensors.emplace_back(name, &w); });
  const double base = loss(params);
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    auto& [name, w] = tensors[t];
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < w->size(); ++i) {
      const double orig = w->data()[i];
      w->data()[i] = orig + step;
      const double up = loss(params);
      w->data()[i] = orig - step;
      const double down = loss(params);
      w->data()[i] = orig;
      const double fwd = (up - base) / step, bwd = (base - down) / step;
      const double central = (up - down) / (2.0 * step);
      if (std::fabs(fwd - bwd) > 1e-6 * std::max(1.0, std::fabs(central)) + 1e-3 * std::fabs(central)) {
        ++rep.kinks;
        continue;
      }
      const double a = grads[t]->data()[i];
      diff2 += (a - central) * (a - central);
      a2 += a * a;
      n2 += central * central;
      ++rep.checked;
    }
    const double denom = std::max(std::sqrt(std::max(a2, n2)), 1e-12);
    const double rel = std::sqrt(diff2) / denom;
    if (rel > rep.worst_rel_error || rep.worst_tensor.empty()) {
      if (rel >= rep.worst_rel_error) {
        rep.worst_rel_error = rel;
        rep.worst_tensor = name;
      }
    }
  }
  return rep;
}

}  // namespace kgalign::oracle
