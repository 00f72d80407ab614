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

// Seeded random graph generators used by tests, benchmarks and the CLI.

#ifndef MAGI_SYNTHETIC_H_
#define MAGI_SYNTHETIC_H_

#include <cstdint>
#include <vector>

#include "magi/graph.h"
#include "magi/partition.h"

namespace magi {

struct PlantedGraph {
  CsrGraph graph;
  Partition labels;
};

// G(N, p) sampled by geometric skipping, so cost is O(N + m).
CsrGraph erdos_renyi(NodeId num_nodes, double p, std::uint64_t seed);

// Planted partition with consecutive blocks. Also O(N + m).
PlantedGraph stochastic_block_model(const std::vector<NodeId>& block_sizes,
                                    double p_in, double p_out, std::uint64_t seed);

// Two k-cliques joined by the single edge (k-1, k).
CsrGraph barbell(NodeId clique_size);

// Disjoint cliques of the given size, labelled by clique.
PlantedGraph disjoint_cliques(int num_cliques, NodeId clique_size);

// Unit-variance Gaussian features where members of block b get `shift` added
// on their own slice of dim / C consecutive columns.
FeatureMatrix block_features(const Partition& labels, int dim, double shift,
                             std::uint64_t seed);

}  // namespace magi

#endif  // MAGI_SYNTHETIC_H_
