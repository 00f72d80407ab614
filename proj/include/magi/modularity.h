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

#ifndef MAGI_MODULARITY_H_
#define MAGI_MODULARITY_H_

#include "magi/dense.h"
#include "magi/graph.h"
#include "magi/partition.h"

namespace magi {

// Largest node count for which the dense N x N routines below will allocate.
inline constexpr NodeId kDefaultDenseCap = 20000;

// Dense symmetric modularity matrix; every row sums to zero.
struct DenseModularityMatrix {
  Matrix<double> values;

  NodeId size() const { return static_cast<NodeId>(values.rows()); }
  double operator()(NodeId i, NodeId j) const { return values(i, j); }
};

// Newman modularity of a hard partition, computed from the sparse structure
// in O(m + N + C) without materializing B. Throws InvalidArgument when the
// graph has no edges or the partition does not cover every node.
double global_modularity(const CsrGraph& graph, const Partition& partition);

// B_ij = A_ij - d_i d_j / 2m. Oracle and ablation use only: refuses graphs
// with more than `cap` nodes by throwing CapacityExceeded.
DenseModularityMatrix dense_modularity_matrix(const CsrGraph& graph,
                                              NodeId cap = kDefaultDenseCap);

// Modularity matrix of the averaged walk-count matrix
//   W = mean_k offdiag(A^k) / sum(offdiag(A^k)),  k = 1..order,
// with the configuration term built from W's row sums:
//   B_ij = W_ij - w_i w_j / sum(w).
// Powers whose off-diagonal part is empty are skipped. order == 1 gives
// dense_modularity_matrix(graph) / 2m. Dense only; same cap semantics.
DenseModularityMatrix high_order_modularity_matrix(
    const CsrGraph& graph, int order, NodeId cap = kDefaultDenseCap);

}  // namespace magi

#endif  // MAGI_MODULARITY_H_
