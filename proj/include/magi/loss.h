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

#ifndef MAGI_LOSS_H_
#define MAGI_LOSS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "magi/dense.h"
#include "magi/graph.h"
#include "magi/modularity.h"
#include "magi/walk.h"

namespace magi {

// How positive/negative pairs are chosen inside a batch.
enum class PairRule {
  kMagi,           // sign of the walk-based mini-batch modularity matrix
  kModularity,     // sign of A_ij - d_i d_j / 2m on the batch ("ms")
  kEdgeIndicator,  // positives are the in-batch edges ("ei")
  kHighOrder,      // sign of the dense high-order modularity matrix ("hms")
};

enum class LossKind { kSimclr, kSimple };

std::string to_string(PairRule rule);
std::string to_string(LossKind kind);
PairRule parse_pair_rule(const std::string& name);
LossKind parse_loss_kind(const std::string& name);

// Per-anchor positive and negative local indices. For every anchor v the two
// lists partition the batch minus v. Anchors without positives are inactive.
struct PairSets {
  std::vector<std::vector<NodeId>> positives;
  std::vector<std::vector<NodeId>> negatives;

  NodeId size() const { return static_cast<NodeId>(positives.size()); }
  bool active(NodeId v) const { return !positives[v].empty(); }
  NodeId num_active() const;
  std::int64_t num_positive_pairs() const;
};

// Strict sign rule on a square score matrix: positive iff score > 0,
// diagonal excluded.
PairSets derive_pairs_from_scores(const Matrix<double>& scores);

// Pairs from the batch's mini-batch modularity matrix.
PairSets derive_pairs(const Batch& batch);

// Ablation rules over a sorted member list (local index = position).
PairSets derive_pairs_edge_indicator(const CsrGraph& graph,
                                     std::span<const NodeId> members);
PairSets derive_pairs_modularity_sign(const CsrGraph& graph,
                                      std::span<const NodeId> members);
PairSets derive_pairs_high_order(const DenseModularityMatrix& high_order,
                                 std::span<const NodeId> members);

struct LossReport {
  double value = 0.0;
  NodeId num_active_anchors = 0;
  double temperature = 0.0;
};

template <typename T>
struct LossResult {
  LossReport report;
  Matrix<T> grad;  // dLoss/dZ
};

// Softmax contrastive loss over unit-norm rows of z, averaged over active
// anchors. Per anchor v with logits s_u = z_v . z_u / tau:
//   default:   -sum_{p in P} log( e^{s_p} / sum_{u in P + N} e^{s_u} )
//   per_pair:  -sum_{p in P} log( e^{s_p} / (e^{s_p} + sum_{n in N} e^{s_n}) )
// Throws InvalidArgument for tau <= 0 or when no anchor is active.
template <typename T>
LossResult<T> simclr_loss(const Matrix<T>& z, const PairSets& pairs, double tau,
                          bool per_pair_denominator = false);

// -sum_{p in P} z_v . z_p + sum_{n in N} z_v . z_n, summed over active anchors.
template <typename T>
LossResult<T> simple_loss(const Matrix<T>& z, const PairSets& pairs);

}  // namespace magi

#endif  // MAGI_LOSS_H_
