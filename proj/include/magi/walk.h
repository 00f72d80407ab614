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

// Two-stage random-walk sampling.
//
// Stage one walks from each root and keeps the nodes visited more often than
// the mean as that root's sub-community; the union of sub-communities is the
// training batch. Stage two walks again from every batch member over the full
// graph, counts only the visits that land inside the batch, and row-normalizes
// the counts into a similarity matrix S. The mini-batch modularity matrix is
// S minus the configuration-model expectation.

#ifndef MAGI_WALK_H_
#define MAGI_WALK_H_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "magi/dense.h"
#include "magi/graph.h"
#include "magi/rng.h"

namespace magi {

struct WalkConfig {
  int num_walks = 100;   // walks per node (t)
  int depth = 2;         // steps per walk (l)
  int num_roots = 2048;  // roots per batch (n)
  std::uint64_t seed = 0;
  // Use the exact configuration term S_v. * S_.u / sum(S) instead of 1/|B|.
  bool full_config_model = false;

  // Throws InvalidArgument unless every count is >= 1.
  void validate() const;
};

// Visit counts of the walks from one root, keyed by node id (ascending).
// The root's own step-0 occupancy is never counted.
struct VisitCounts {
  std::vector<std::pair<NodeId, std::int64_t>> counts;
  std::int64_t total = 0;

  bool empty() const { return counts.empty(); }
  std::int64_t count_of(NodeId v) const;
};

struct Batch {
  std::vector<NodeId> members;  // sorted, distinct
  Matrix<double> similarity;    // S, rows sum to 1
  Matrix<double> modularity;    // mini-batch B, rows sum to 0

  NodeId size() const { return static_cast<NodeId>(members.size()); }
  std::optional<NodeId> local_of(NodeId global) const;
};

// t walks of depth l from `root`; every step moves to a uniform neighbor and
// every step 1..l is counted. An isolated root yields empty counts.
VisitCounts random_walk_counts(const CsrGraph& graph, NodeId root, int num_walks,
                               int depth, Rng& rng);

// Nodes visited strictly more often than the mean visit count, plus the root.
// A single visited node is admitted (the strict rule would reject it).
std::vector<NodeId> filter_sub_community(NodeId root, const VisitCounts& visits);

// Sorted union of the sub-communities of every non-isolated root. Each root
// draws from its own stream keyed by (cfg.seed, stream_key, root).
std::vector<NodeId> build_batch(const CsrGraph& graph,
                                std::span<const NodeId> roots,
                                const WalkConfig& cfg, std::uint64_t stream_key);

// Similarity and modularity matrices for `members` (sorted and deduplicated
// internally). Rows without any in-batch visit become uniform 1/|B|.
// Throws InvalidArgument when fewer than two distinct members are given.
Batch batch_similarity(const CsrGraph& graph, std::span<const NodeId> members,
                       const WalkConfig& cfg, std::uint64_t stream_key);

}  // namespace magi

#endif  // MAGI_WALK_H_
