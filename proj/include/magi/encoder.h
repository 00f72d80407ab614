// Copyright 2026 The MAGI Clustering Authors
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

// GNN encoders with hand-written backward passes.
//
// Both architectures map node features to L2-row-normalized embeddings. Node
// representations are row vectors, so a layer computes H' = act(Agg(H) W)
// with W of shape (in x out).
//
//   GCN:  Agg(H)_u = sum_{v in N(u) + u} H_v / sqrt((|N_u|+1)(|N_v|+1))
//   SAGE: H'_u = act(H_u W_self + mean_{v in N(u)} H_v W_neigh),
//         with a zero aggregate for nodes without neighbors.
//
// The activation is LeakyReLU with a configurable negative slope. It is
// applied on every layer unless `activate_output` is false, in which case the
// last layer stays linear before normalization.

#ifndef MAGI_ENCODER_H_
#define MAGI_ENCODER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "magi/dense.h"
#include "magi/graph.h"

namespace magi {

enum class Arch : std::uint32_t { kGcn = 0, kSage = 1 };

std::string to_string(Arch arch);
Arch parse_arch(const std::string& name);

template <typename T>
struct LayerWeights {
  Matrix<T> w;        // GCN weight, or the SAGE self weight
  Matrix<T> w_neigh;  // SAGE neighbor weight; empty for GCN
};

template <typename T>
struct EncoderParams {
  Arch arch = Arch::kGcn;
  std::vector<int> dims;  // dims.front() = feature dim, dims.back() = embedding dim
  T leaky_slope = T(0.5);
  bool activate_output = true;
  std::vector<LayerWeights<T>> layers;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }

  // Glorot-uniform weights drawn from a stream keyed by `seed`.
  static EncoderParams init(Arch arch, std::vector<int> dims, T leaky_slope,
                            bool activate_output, std::uint64_t seed);

  // Throws InvalidArgument if the layer shapes do not chain along `dims` or a
  // weight is non-finite.
  void validate() const;

  template <typename U>
  EncoderParams<U> cast() const {
    EncoderParams<U> out;
    out.arch = arch;
    out.dims = dims;
    out.leaky_slope = static_cast<U>(leaky_slope);
    out.activate_output = activate_output;
    for (const auto& l : layers) {
      out.layers.push_back({l.w.template cast<U>(), l.w_neigh.template cast<U>()});
    }
    return out;
  }
};

template <typename T>
using EncoderGradients = std::vector<LayerWeights<T>>;

// Intermediates retained by the forward pass for the backward pass.
template <typename T>
struct ForwardWorkspace {
  const CsrGraph* graph = nullptr;      // propagation graph, not owned
  std::vector<Matrix<T>> inputs;        // h^(l-1)
  std::vector<Matrix<T>> aggregated;    // GCN: Agg(h); SAGE: neighbor mean
  std::vector<Matrix<T>> preacts;       // before the activation
  Matrix<T> output;                     // before row normalization
  Vector<T> row_norms;

  bool ready() const { return graph != nullptr && !preacts.empty(); }
};

// Shared forward for both architectures. `graph` supplies neighborhoods and
// degrees (an induced subgraph during training, the full graph at inference).
template <typename T>
Matrix<T> encoder_forward(const CsrGraph& graph, const Matrix<T>& features,
                          const EncoderParams<T>& params,
                          ForwardWorkspace<T>* workspace = nullptr);

// Architecture-checked entry points.
template <typename T>
Matrix<T> gcn_forward(const InducedSubgraph& sub, const Matrix<T>& features,
                      const EncoderParams<T>& params,
                      ForwardWorkspace<T>* workspace = nullptr);
template <typename T>
Matrix<T> sage_forward(const InducedSubgraph& sub, const Matrix<T>& features,
                       const EncoderParams<T>& params,
                       ForwardWorkspace<T>* workspace = nullptr);

// Exact gradients of a scalar loss w.r.t. every weight, given dLoss/dZ for the
// normalized output Z. Includes the row-normalization Jacobian.
template <typename T>
EncoderGradients<T> encoder_backward(const ForwardWorkspace<T>& workspace,
                                     const EncoderParams<T>& params,
                                     const Matrix<T>& grad_output);

// Inference over the whole graph with full neighborhoods.
Matrix<Real> full_graph_embed(const CsrGraph& graph, const FeatureMatrix& features,
                              const EncoderParams<Real>& params);

// Copies the rows of `ids` into a dense batch matrix.
Matrix<Real> gather_rows(const FeatureMatrix& features, std::span<const NodeId> ids);

struct OptimizerConfig {
  double learning_rate = 5e-4;
  double weight_decay = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam moments with decoupled weight decay (AdamW).
template <typename T>
struct OptimizerState {
  std::vector<LayerWeights<T>> first_moment;
  std::vector<LayerWeights<T>> second_moment;
  std::int64_t step = 0;
  OptimizerConfig config;

  static OptimizerState init(const EncoderParams<T>& params,
                             const OptimizerConfig& config);
};

// Throws InvalidArgument naming the offending layer when a gradient is
// non-finite or shapes disagree; params are left untouched in that case.
template <typename T>
void optimizer_step(EncoderParams<T>& params, const EncoderGradients<T>& grads,
                    OptimizerState<T>& state);

}  // namespace magi

#endif  // MAGI_ENCODER_H_
