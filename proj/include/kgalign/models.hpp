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

// The two multi-aspect entity encoders.
//
//   MAN   three GCN stacks over topology, relation counts and attribute
//         counts; output [H_t | H_a | H_r].
//   HMAN  a GCN stack over topology plus non-propagating highway encoders
//         for relations and attributes; output l2_normalize([H_t | G_r | G_a]).
//
// Every GCN layer computes relu(Â · H · W) with Â the normalized adjacency.
// The topology stack is featureless: its first layer is Â · W1, i.e. the
// rows of W1 serve as per-entity input vectors.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "kgalign/common.hpp"
#include "kgalign/features.hpp"
#include "kgalign/kg_data.hpp"
#include "kgalign/linalg.hpp"

namespace kgalign {

enum class Variant : std::uint8_t { kMan = 0, kHman = 1 };

inline std::string_view variant_name(Variant v) { return v == Variant::kMan ? "man" : "hman"; }

inline Variant parse_variant(std::string_view s) {
  if (s == "man") return Variant::kMan;
  if (s == "hman") return Variant::kHman;
  fail("unknown model '", std::string(s), "' (expected man or hman)");
}

struct ModelConfig {
  Variant variant = Variant::kHman;
  std::size_t topo_dim = 200;
  std::size_t rel_dim = 100;
  std::size_t attr_dim = 100;
  std::size_t layers = 2;
  // Off = HMAN branches stop after the fully connected layer (G = S).
  bool highway = true;
  ChannelSet channels = ChannelSet::all();

  bool operator==(const ModelConfig&) const = default;
};

struct GcnStack {
  std::vector<DenseMatrix> weights;  // W1 .. Wl
  bool operator==(const GcnStack&) const = default;
};

// Fully connected layer followed by one highway layer:
//   S = relu(X W1 + b1), T = sigmoid(S Wt + bt),
//   G = relu(S W2 + b2) * T + S * (1 - T).
struct HighwayEncoder {
  DenseMatrix w1, b1;
  DenseMatrix wt, bt;
  DenseMatrix w2, b2;
  bool operator==(const HighwayEncoder&) const = default;
};

using Branch = std::variant<std::monostate, GcnStack, HighwayEncoder>;

struct ModelParams {
  ModelConfig config;
  std::size_t entity_count = 0;
  std::size_t relation_inputs = 0;   // vocabulary width of X_r
  std::size_t attribute_inputs = 0;  // vocabulary width of X_a
  GcnStack topo_gcn;                 // empty when TE is dropped
  Branch relation_branch;
  Branch attribute_branch;

  bool operator==(const ModelParams&) const = default;

  // Visits every learnable tensor in a fixed order. The same order is used by
  // the optimizer, gradient checks and checkpoints.
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    visit_tensors(*this, fn);
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    visit_tensors(*this, fn);
  }

  // Same structure, all tensors zero. Used as the gradient buffer.
  ModelParams zeros_like() const {
    ModelParams z = *this;
    z.for_each_tensor([](const std::string&, DenseMatrix& m) { m = DenseMatrix(m.rows(), m.cols()); });
    return z;
  }

  std::size_t output_dim() const {
    std::size_t d = 0;
    if (config.channels.contains(Channel::kTopology)) d += config.topo_dim;
    if (config.channels.contains(Channel::kRelation)) d += config.rel_dim;
    if (config.channels.contains(Channel::kAttribute)) d += config.attr_dim;
    return d;
  }

 private:
  template <typename Self, typename Fn>
  static void visit_tensors(Self& self, Fn& fn) {
    auto gcn = [&](auto& stack, const std::string& prefix) {
      for (std::size_t i = 0; i < stack.weights.size(); ++i)
        fn(prefix + ".w" + std::to_string(i + 1), stack.weights[i]);
    };
    auto branch = [&](auto& b, const std::string& prefix) {
      if (auto* g = std::get_if<GcnStack>(&b)) {
        gcn(*g, prefix);
      } else if (auto* h = std::get_if<HighwayEncoder>(&b)) {
        fn(prefix + ".w1", h->w1);
        fn(prefix + ".b1", h->b1);
        fn(prefix + ".wt", h->wt);
        fn(prefix + ".bt", h->bt);
        fn(prefix + ".w2", h->w2);
        fn(prefix + ".b2", h->b2);
      }
    };
    gcn(self.topo_gcn, "topo");
    branch(self.relation_branch, "rel");
    branch(self.attribute_branch, "attr");
  }
};

// Everything the encoders read from the graph. The normalized adjacency is
// symmetric, so it doubles as its own transpose in the backward pass.
struct GraphInputs {
  SparseMatrix adjacency;
  SparseMatrix relation_feats;
  SparseMatrix relation_feats_t;
  SparseMatrix attribute_feats;
  SparseMatrix attribute_feats_t;

  static GraphInputs build(SparseMatrix adjacency, const FeatureSet& feats) {
    KGALIGN_CHECK(adjacency.rows() == feats.entity_count && adjacency.cols() == feats.entity_count,
                  "adjacency is ", adjacency.rows(), "x", adjacency.cols(), " but features cover ",
                  feats.entity_count, " entities");
    GraphInputs in;
    in.adjacency = std::move(adjacency);
    in.relation_feats = feats.relation_feats;
    in.relation_feats_t = feats.relation_feats.transpose();
    in.attribute_feats = feats.attribute_feats;
    in.attribute_feats_t = feats.attribute_feats.transpose();
    return in;
  }

  static GraphInputs build(const AlignmentTask& task, const FeatureSet& feats) {
    return build(normalize_adjacency(task.combined_edges(), task.total()), feats);
  }
};

// ---------------------------------------------------------------------------
// Initialization.

namespace detail {

inline DenseMatrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  DenseMatrix m(fan_in, fan_out);
  const double limit = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(1, fan_in + fan_out)));
  for (double& v : m.data()) v = uniform_real(rng, -limit, limit);
  return m;
}

inline GcnStack init_gcn(std::size_t in_dim, std::size_t dim, std::size_t layers, Rng& rng) {
  GcnStack s;
  for (std::size_t l = 0; l < layers; ++l) s.weights.push_back(glorot(l == 0 ? in_dim : dim, dim, rng));
  return s;
}

inline HighwayEncoder init_highway(std::size_t in_dim, std::size_t dim, Rng& rng) {
  HighwayEncoder h;
  h.w1 = glorot(in_dim, dim, rng);
  h.b1 = DenseMatrix(1, dim, 0.0);
  h.wt = glorot(dim, dim, rng);
  h.bt = DenseMatrix(1, dim, -1.0);
  h.w2 = glorot(dim, dim, rng);
  h.b2 = DenseMatrix(1, dim, 0.0);
  return h;
}

}  // namespace detail

// Each branch draws from its own seed-derived stream, so the topology stack
// of a MAN and an HMAN built from the same seed is identical.
inline ModelParams init_params(const ModelConfig& config, const FeatureSet& feats, std::uint64_t seed) {
  KGALIGN_CHECK(!config.channels.empty(), "model has no active feature channel");
  KGALIGN_CHECK(config.layers >= 1, "GCN stacks need at least one layer");
  KGALIGN_CHECK(config.topo_dim > 0 && config.rel_dim > 0 && config.attr_dim > 0, "branch widths must be positive");
  ModelParams p;
  p.config = config;
  p.entity_count = feats.entity_count;
  p.relation_inputs = feats.relation_feats.cols();
  p.attribute_inputs = feats.attribute_feats.cols();
  if (config.channels.contains(Channel::kTopology)) {
    Rng rng(mix_seed(seed, 1));
    p.topo_gcn = detail::init_gcn(p.entity_count, config.topo_dim, config.layers, rng);
  }
  if (config.channels.contains(Channel::kRelation)) {
    Rng rng(mix_seed(seed, 2));
    if (config.variant == Variant::kMan)
      p.relation_branch = detail::init_gcn(p.relation_inputs, config.rel_dim, config.layers, rng);
    else
      p.relation_branch = detail::init_highway(p.relation_inputs, config.rel_dim, rng);
  }
  if (config.channels.contains(Channel::kAttribute)) {
    Rng rng(mix_seed(seed, 3));
    if (config.variant == Variant::kMan)
      p.attribute_branch = detail::init_gcn(p.attribute_inputs, config.attr_dim, config.layers, rng);
    else
      p.attribute_branch = detail::init_highway(p.attribute_inputs, config.attr_dim, rng);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Forward pass with the activations the backward pass needs.

struct GcnCache {
  std::vector<DenseMatrix> pre;   // Z_k = Â · H_{k-1} · W_k
  std::vector<DenseMatrix> post;  // H_k = relu(Z_k)
};

struct HighwayCache {
  DenseMatrix a1, s, at, t, a2, r, g;
};

struct BranchCache {
  Channel channel;
  std::size_t width = 0;
  std::variant<GcnCache, HighwayCache> cache;

  const DenseMatrix& output() const {
    if (auto* g = std::get_if<GcnCache>(&cache)) return g->post.back();
    return std::get<HighwayCache>(cache).g;
  }
};

struct ForwardCache {
  std::vector<BranchCache> branches;  // in output column order
  DenseMatrix concat;
  DenseMatrix output;
};

namespace detail {

// input == nullptr selects the featureless (identity) first layer.
inline GcnCache gcn_forward(const GcnStack& stack, const SparseMatrix& adjacency, const SparseMatrix* input) {
  GcnCache c;
  for (std::size_t l = 0; l < stack.weights.size(); ++l) {
    const DenseMatrix& w = stack.weights[l];
    DenseMatrix projected;
    if (l == 0) {
      if (input) {
        KGALIGN_CHECK(input->cols() == w.rows(), "GCN input width ", input->cols(), " != W1 rows ", w.rows());
        projected = spmm(*input, w);
      } else {
        KGALIGN_CHECK(adjacency.cols() == w.rows(), "featureless W1 has ", w.rows(), " rows for ",
                      adjacency.cols(), " entities");
        projected = w;
      }
    } else {
      projected = matmul(c.post.back(), w);
    }
    c.pre.push_back(spmm(adjacency, projected));
    c.post.push_back(relu(c.pre.back()));
  }
  return c;
}

inline void gcn_backward(const GcnStack& stack, const SparseMatrix& adjacency, const SparseMatrix* input_t,
                         const GcnCache& c, DenseMatrix grad_out, GcnStack& grads) {
  for (std::size_t l = stack.weights.size(); l-- > 0;) {
    DenseMatrix d_pre = relu_backward(c.pre[l], grad_out);
    DenseMatrix d_projected = spmm(adjacency, d_pre);
    if (l == 0) {
      if (input_t)
        axpy(1.0, spmm(*input_t, d_projected), grads.weights[0]);
      else
        axpy(1.0, d_projected, grads.weights[0]);
    } else {
      axpy(1.0, matmul_tn(c.post[l - 1], d_projected), grads.weights[l]);
      grad_out = matmul_nt(d_projected, stack.weights[l]);
    }
  }
}

inline HighwayCache highway_forward_cached(const HighwayEncoder& enc, const SparseMatrix& x, bool highway) {
  KGALIGN_CHECK(x.cols() == enc.w1.rows(), "highway input width ", x.cols(), " != W1 rows ", enc.w1.rows());
  HighwayCache c;
  c.a1 = spmm(x, enc.w1);
  add_row_bias(c.a1, enc.b1);
  c.s = relu(c.a1);
  if (!highway) {
    c.g = c.s;
    return c;
  }
  c.at = matmul(c.s, enc.wt);
  add_row_bias(c.at, enc.bt);
  c.t = sigmoid(c.at);
  c.a2 = matmul(c.s, enc.w2);
  add_row_bias(c.a2, enc.b2);
  c.r = relu(c.a2);
  c.g = DenseMatrix(c.s.rows(), c.s.cols());
  for (std::size_t i = 0; i < c.g.size(); ++i) {
    const double t = c.t.data()[i];
    c.g.data()[i] = c.r.data()[i] * t + c.s.data()[i] * (1.0 - t);
  }
  return c;
}

inline void highway_backward(const HighwayEncoder& enc, const SparseMatrix& x_t, const HighwayCache& c,
                             const DenseMatrix& grad_g, bool highway, HighwayEncoder& grads) {
  DenseMatrix d_s;
  if (!highway) {
    d_s = grad_g;
  } else {
    DenseMatrix d_r(grad_g.rows(), grad_g.cols()), d_t(grad_g.rows(), grad_g.cols());
    d_s = DenseMatrix(grad_g.rows(), grad_g.cols());
    for (std::size_t i = 0; i < grad_g.size(); ++i) {
      const double g = grad_g.data()[i], t = c.t.data()[i];
      d_r.data()[i] = g * t;
      d_t.data()[i] = g * (c.r.data()[i] - c.s.data()[i]);
      d_s.data()[i] = g * (1.0 - t);
    }
    DenseMatrix d_a2 = relu_backward(c.a2, d_r);
    axpy(1.0, matmul_tn(c.s, d_a2), grads.w2);
    axpy(1.0, column_sums(d_a2), grads.b2);
    axpy(1.0, matmul_nt(d_a2, enc.w2), d_s);

    DenseMatrix d_at = sigmoid_backward(c.t, d_t);
    axpy(1.0, matmul_tn(c.s, d_at), grads.wt);
    axpy(1.0, column_sums(d_at), grads.bt);
    axpy(1.0, matmul_nt(d_at, enc.wt), d_s);
  }
  DenseMatrix d_a1 = relu_backward(c.a1, d_s);
  axpy(1.0, spmm(x_t, d_a1), grads.w1);
  axpy(1.0, column_sums(d_a1), grads.b1);
}

inline const SparseMatrix& channel_input(const GraphInputs& in, Channel c, bool transposed) {
  if (c == Channel::kRelation) return transposed ? in.relation_feats_t : in.relation_feats;
  return transposed ? in.attribute_feats_t : in.attribute_feats;
}

// Output column order of each variant.
inline std::vector<Channel> block_order(const ModelParams& p) {
  std::vector<Channel> order =
      p.config.variant == Variant::kMan
          ? std::vector<Channel>{Channel::kTopology, Channel::kAttribute, Channel::kRelation}
          : std::vector<Channel>{Channel::kTopology, Channel::kRelation, Channel::kAttribute};
  std::erase_if(order, [&](Channel c) { return !p.config.channels.contains(c); });
  return order;
}

inline const Branch& branch_of(const ModelParams& p, Channel c) {
  return c == Channel::kRelation ? p.relation_branch : p.attribute_branch;
}

inline Branch& branch_of(ModelParams& p, Channel c) {
  return c == Channel::kRelation ? p.relation_branch : p.attribute_branch;
}

}  // namespace detail

inline ForwardCache forward(const ModelParams& params, const GraphInputs& in) {
  KGALIGN_CHECK(in.adjacency.rows() == params.entity_count, "model was built for ", params.entity_count,
                " entities, graph has ", in.adjacency.rows());
  ForwardCache fc;
  for (Channel c : detail::block_order(params)) {
    BranchCache bc;
    bc.channel = c;
    if (c == Channel::kTopology) {
      bc.cache = detail::gcn_forward(params.topo_gcn, in.adjacency, nullptr);
    } else {
      const Branch& b = detail::branch_of(params, c);
      const SparseMatrix& x = detail::channel_input(in, c, false);
      if (auto* g = std::get_if<GcnStack>(&b))
        bc.cache = detail::gcn_forward(*g, in.adjacency, &x);
      else
        bc.cache = detail::highway_forward_cached(std::get<HighwayEncoder>(b), x, params.config.highway);
    }
    bc.width = bc.output().cols();
    fc.branches.push_back(std::move(bc));
  }
  std::vector<const DenseMatrix*> blocks;
  for (const auto& bc : fc.branches) blocks.push_back(&bc.output());
  fc.concat = concat_cols(blocks);
  fc.output = params.config.variant == Variant::kHman ? l2_normalize_rows(fc.concat) : fc.concat;
  return fc;
}

// Gradient of a scalar loss w.r.t. every parameter, given dLoss/dOutput.
inline ModelParams backward(const ModelParams& params, const GraphInputs& in, const ForwardCache& fc,
                            const DenseMatrix& grad_output) {
  KGALIGN_CHECK(grad_output.same_shape(fc.output), "backward: gradient shape mismatch");
  ModelParams grads = params.zeros_like();
  DenseMatrix d_concat = params.config.variant == Variant::kHman
                             ? l2_normalize_rows_backward(fc.concat, fc.output, grad_output)
                             : grad_output;
  std::size_t col = 0;
  for (const auto& bc : fc.branches) {
    DenseMatrix d_block = slice_cols(d_concat, col, bc.width);
    col += bc.width;
    if (bc.channel == Channel::kTopology) {
      detail::gcn_backward(params.topo_gcn, in.adjacency, nullptr, std::get<GcnCache>(bc.cache),
                           std::move(d_block), grads.topo_gcn);
      continue;
    }
    const Branch& b = detail::branch_of(params, bc.channel);
    Branch& gb = detail::branch_of(grads, bc.channel);
    const SparseMatrix& x_t = detail::channel_input(in, bc.channel, true);
    if (auto* g = std::get_if<GcnStack>(&b)) {
      detail::gcn_backward(*g, in.adjacency, &x_t, std::get<GcnCache>(bc.cache), std::move(d_block),
                           std::get<GcnStack>(gb));
    } else {
      detail::highway_backward(std::get<HighwayEncoder>(b), x_t, std::get<HighwayCache>(bc.cache), d_block,
                               params.config.highway, std::get<HighwayEncoder>(gb));
    }
  }
  return grads;
}

inline EmbeddingMatrix embed(const ModelParams& params, const GraphInputs& in) {
  return forward(params, in).output;
}

inline EmbeddingMatrix man_forward(const ModelParams& params, const SparseMatrix& a_hat, const FeatureSet& feats) {
  KGALIGN_CHECK(params.config.variant == Variant::kMan, "man_forward called with HMAN parameters");
  return embed(params, GraphInputs::build(a_hat, feats));
}

inline EmbeddingMatrix hman_forward(const ModelParams& params, const SparseMatrix& a_hat, const FeatureSet& feats) {
  KGALIGN_CHECK(params.config.variant == Variant::kHman, "hman_forward called with MAN parameters");
  return embed(params, GraphInputs::build(a_hat, feats));
}

inline DenseMatrix highway_forward(const HighwayEncoder& enc, const SparseMatrix& x, bool highway = true) {
  return detail::highway_forward_cached(enc, x, highway).g;
}

// ---------------------------------------------------------------------------
// Checkpoints: "KGCKPT" + u32 version, model header, tensors in
// for_each_tensor order, then the embedding snapshot taken after training.

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::size_t top_f = 0;
  std::size_t source_entities = 0;
  std::size_t target_entities = 0;
  EmbeddingMatrix embeddings;

  bool operator==(const Checkpoint&) const = default;
};

inline std::string serialize_checkpoint(const Checkpoint& ck) {
  BinaryWriter w;
  w.bytes("KGCKPT");
  w.u32(kCheckpointFormatVersion);
  const auto& cfg = ck.params.config;
  w.u8(static_cast<std::uint8_t>(cfg.variant));
  w.u64(cfg.topo_dim);
  w.u64(cfg.rel_dim);
  w.u64(cfg.attr_dim);
  w.u64(cfg.layers);
  w.u8(cfg.highway ? 1 : 0);
  w.u8(cfg.channels.bits());
  w.u64(ck.top_f);
  w.u64(ck.source_entities);
  w.u64(ck.target_entities);
  w.u64(ck.params.relation_inputs);
  w.u64(ck.params.attribute_inputs);
  ck.params.for_each_tensor([&](const std::string& name, const DenseMatrix& m) {
    w.str(name);
    write_dense(w, m);
  });
  write_dense(w, ck.embeddings);
  return w.data();
}

inline Checkpoint deserialize_checkpoint(BinaryReader& r) {
  r.expect_magic("KGCKPT", kCheckpointFormatVersion);
  Checkpoint ck;
  ModelConfig cfg;
  std::uint8_t variant = r.u8();
  KGALIGN_CHECK(variant <= 1, r.source(), ": unknown model variant ", int(variant));
  cfg.variant = static_cast<Variant>(variant);
  cfg.topo_dim = r.u64();
  cfg.rel_dim = r.u64();
  cfg.attr_dim = r.u64();
  cfg.layers = r.u64();
  cfg.highway = r.u8() != 0;
  cfg.channels = ChannelSet::from_bits(r.u8());
  ck.top_f = r.u64();
  ck.source_entities = r.u64();
  ck.target_entities = r.u64();

  // Rebuild the parameter structure, then overwrite every tensor.
  FeatureSet shape;
  shape.entity_count = ck.source_entities + ck.target_entities;
  shape.relation_feats = SparseMatrix(shape.entity_count, r.u64());
  shape.attribute_feats = SparseMatrix(shape.entity_count, r.u64());
  ck.params = init_params(cfg, shape, 0);
  ck.params.for_each_tensor([&](const std::string& name, DenseMatrix& m) {
    std::string stored = r.str();
    KGALIGN_CHECK(stored == name, r.source(), ": expected tensor ", name, ", found ", stored);
    DenseMatrix v = read_dense(r);
    KGALIGN_CHECK(v.same_shape(m), r.source(), ": tensor ", name, " has the wrong shape");
    m = std::move(v);
  });
  ck.embeddings = read_dense(r);
  KGALIGN_CHECK(r.at_end(), r.source(), ": trailing bytes");
  return ck;
}

inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  auto r = BinaryReader::from_file(path);
  return deserialize_checkpoint(r);
}

}  // namespace kgalign
