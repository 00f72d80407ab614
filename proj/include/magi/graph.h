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
#ifndef MAGI_GRAPH_H_
#define MAGI_GRAPH_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "magi/types.h"

namespace magi {

// Immutable simple undirected graph in compressed sparse row form.
//
// Every undirected edge {u, v} is stored twice (u->v and v->u). Rows are
// sorted ascending without duplicates and there are no self-loops, so
// degree(v) == row length and the degrees sum to 2 * num_edges().
class CsrGraph {
 public:
  CsrGraph() : row_offsets_(1, 0) {}

  // Normalizes an arbitrary edge list: symmetrizes, collapses duplicates and
  // drops self-loops. Throws InvalidArgument for ids outside [0, num_nodes).
  static CsrGraph from_edges(NodeId num_nodes,
                             std::span<const std::pair<NodeId, NodeId>> edges);

  NodeId num_nodes() const { return static_cast<NodeId>(degrees_.size()); }
  EdgeIndex num_edges() const { return num_edges_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbors_.data() + row_offsets_[v],
            static_cast<std::size_t>(row_offsets_[v + 1] - row_offsets_[v])};
  }
  NodeId degree(NodeId v) const { return degrees_[v]; }

  std::span<const EdgeIndex> row_offsets() const { return row_offsets_; }
  std::span<const NodeId> adjacency() const { return neighbors_; }
  std::span<const NodeId> degrees() const { return degrees_; }

  // O(log degree) membership test on the sorted row.
  bool has_edge(NodeId u, NodeId v) const;

  // Each undirected edge once, as (u, v) with u < v, in row order.
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

  friend bool operator==(const CsrGraph&, const CsrGraph&) = default;

 private:
  std::vector<EdgeIndex> row_offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<NodeId> degrees_;
  EdgeIndex num_edges_ = 0;
};

// Row-major dense node attributes, one row per node.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(NodeId num_rows, int dim, std::vector<Real> values);

  NodeId num_rows() const { return num_rows_; }
  int dim() const { return dim_; }
  std::span<const Real> row(NodeId i) const {
    return {values_.data() + static_cast<std::size_t>(i) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  std::span<const Real> values() const { return values_; }

 private:
  NodeId num_rows_ = 0;
  int dim_ = 0;
  std::vector<Real> values_;
};

// Subgraph induced by a node set. Local node i corresponds to global_ids[i];
// the local CSR holds exactly the parent edges with both endpoints present.
struct InducedSubgraph {
  std::vector<NodeId> global_ids;
  CsrGraph local;
  std::unordered_map<NodeId, NodeId> global_to_local;

  std::optional<NodeId> local_of(NodeId global) const {
    auto it = global_to_local.find(global);
    if (it == global_to_local.end()) return std::nullopt;
    return it->second;
  }
};

// Result of loading an edge list with id compaction enabled.
struct RemappedGraph {
  CsrGraph graph;
  // original_ids[new_id] is the id that appeared in the file.
  std::vector<std::int64_t> original_ids;
};

// Parses a whitespace-separated "src dst" edge list. Lines starting with '#'
// and blank lines are skipped. Node ids are kept verbatim, so isolated nodes
// are retained up to max(max id + 1, num_nodes_hint).
CsrGraph load_edge_list(const std::filesystem::path& path,
                        std::optional<NodeId> num_nodes_hint = std::nullopt);

// Same grammar as load_edge_list, but compacts the distinct ids that occur in
// the file to 0..N-1 (ascending original order) and returns the table.
RemappedGraph load_edge_list_remapped(const std::filesystem::path& path);

// Writes each undirected edge once, "u v" per line.
void write_edge_list(const CsrGraph& graph, const std::filesystem::path& path);

// Headerless numeric CSV with any number of rows; every cell must be finite.
FeatureMatrix load_csv_matrix(const std::filesystem::path& path);

// load_csv_matrix plus a check that the row count equals graph.num_nodes().
FeatureMatrix load_features(const std::filesystem::path& path,
                            const CsrGraph& graph);

// Unit-variance Gaussian features for running without an attribute file.
FeatureMatrix random_features(NodeId num_rows, int dim, std::uint64_t seed);

// Throws InvalidArgument when an id is out of range or repeated.
InducedSubgraph induce_subgraph(const CsrGraph& graph,
                                std::span<const NodeId> nodes);

}  // namespace magi

#endif  // MAGI_GRAPH_H_
