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

#include "magi/walk.h"

#include <algorithm>
#include <random>
#include <string>
#include <unordered_map>

#include "magi/parallel.h"

namespace magi {

namespace {

// Moves one step to a uniformly chosen neighbor. `at` must have degree >= 1.
inline NodeId step(const CsrGraph& graph, NodeId at, Rng& rng) {
  auto row = graph.neighbors(at);
  std::uniform_int_distribution<std::size_t> pick(0, row.size() - 1);
  return row[pick(rng)];
}

}  // namespace

void WalkConfig::validate() const {
  if (num_walks < 1 || depth < 1 || num_roots < 1) {
    throw InvalidArgument("walk config needs walks, depth and roots >= 1 (got " +
                          std::to_string(num_walks) + ", " +
                          std::to_string(depth) + ", " +
                          std::to_string(num_roots) + ")");
  }
}

std::int64_t VisitCounts::count_of(NodeId v) const {
  auto it = std::lower_bound(
      counts.begin(), counts.end(), v,
      [](const std::pair<NodeId, std::int64_t>& e, NodeId x) { return e.first < x; });
  return (it != counts.end() && it->first == v) ? it->second : 0;
}

std::optional<NodeId> Batch::local_of(NodeId global) const {
  auto it = std::lower_bound(members.begin(), members.end(), global);
  if (it == members.end() || *it != global) return std::nullopt;
  return static_cast<NodeId>(it - members.begin());
}

VisitCounts random_walk_counts(const CsrGraph& graph, NodeId root, int num_walks,
                               int depth, Rng& rng) {
  VisitCounts out;
  if (root < 0 || root >= graph.num_nodes()) {
    throw InvalidArgument("walk root " + std::to_string(root) + " out of range");
  }
  if (graph.degree(root) == 0) return out;
  std::vector<NodeId> visited;
  visited.reserve(static_cast<std::size_t>(num_walks) * depth);
  for (int w = 0; w < num_walks; ++w) {
    NodeId at = root;
    for (int s = 0; s < depth; ++s) {
      at = step(graph, at, rng);
      if (at != root) visited.push_back(at);
    }
  }
  std::sort(visited.begin(), visited.end());
  for (std::size_t i = 0; i < visited.size();) {
    std::size_t j = i;
    while (j < visited.size() && visited[j] == visited[i]) ++j;
    out.counts.emplace_back(visited[i], static_cast<std::int64_t>(j - i));
    i = j;
  }
  out.total = static_cast<std::int64_t>(visited.size());
  return out;
}

std::vector<NodeId> filter_sub_community(NodeId root, const VisitCounts& visits) {
  std::vector<NodeId> out{root};
  if (visits.counts.size() == 1) {
    out.push_back(visits.counts.front().first);
  } else {
    // count > total / |U|, kept in integers.
    const auto distinct = static_cast<std::int64_t>(visits.counts.size());
    for (auto [v, c] : visits.counts) {
      if (c * distinct > visits.total) out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<NodeId> build_batch(const CsrGraph& graph,
                                std::span<const NodeId> roots,
                                const WalkConfig& cfg, std::uint64_t stream_key) {
  cfg.validate();
  std::vector<std::vector<NodeId>> parts(roots.size());
  parallel_for(0, roots.size(), [&](std::size_t i) {
    const NodeId root = roots[i];
    if (root < 0 || root >= graph.num_nodes()) {
      throw InvalidArgument("root " + std::to_string(root) + " out of range");
    }
    if (graph.degree(root) == 0) return;
    Rng rng = make_stream(cfg.seed, StreamKind::kSubCommunityWalk,
                          {stream_key, static_cast<std::uint64_t>(root)});
    parts[i] = filter_sub_community(
        root, random_walk_counts(graph, root, cfg.num_walks, cfg.depth, rng));
  });
  std::vector<NodeId> batch;
  for (const auto& p : parts) batch.insert(batch.end(), p.begin(), p.end());
  std::sort(batch.begin(), batch.end());
  batch.erase(std::unique(batch.begin(), batch.end()), batch.end());
  return batch;
}

Batch batch_similarity(const CsrGraph& graph, std::span<const NodeId> members,
                       const WalkConfig& cfg, std::uint64_t stream_key) {
  cfg.validate();
  Batch batch;
  batch.members.assign(members.begin(), members.end());
  std::sort(batch.members.begin(), batch.members.end());
  batch.members.erase(std::unique(batch.members.begin(), batch.members.end()),
                      batch.members.end());
  const NodeId b = batch.size();
  if (b < 2) {
    throw InvalidArgument("batch_similarity needs at least two members, got " +
                          std::to_string(b));
  }
  // Hashed rather than an N-sized table so a batch costs O(|B|), not O(N).
  std::unordered_map<NodeId, NodeId> local;
  local.reserve(static_cast<std::size_t>(b));
  for (NodeId i = 0; i < b; ++i) {
    const NodeId g = batch.members[i];
    if (g < 0 || g >= graph.num_nodes()) {
      throw InvalidArgument("batch member " + std::to_string(g) + " out of range");
    }
    local.emplace(g, i);
  }

  batch.similarity = Matrix<double>::Zero(b, b);
  const double uniform = 1.0 / static_cast<double>(b);
  parallel_for(0, static_cast<std::size_t>(b), [&](std::size_t i) {
    const NodeId v = batch.members[i];
    auto row = batch.similarity.row(static_cast<Eigen::Index>(i));
    std::int64_t hits = 0;
    if (graph.degree(v) > 0) {
      Rng rng = make_stream(cfg.seed, StreamKind::kSimilarityWalk,
                            {stream_key, static_cast<std::uint64_t>(v)});
      for (int w = 0; w < cfg.num_walks; ++w) {
        NodeId at = v;
        for (int s = 0; s < cfg.depth; ++s) {
          at = step(graph, at, rng);
          const auto it = local.find(at);
          if (it != local.end()) {
            row(it->second) += 1.0;
            ++hits;
          }
        }
      }
    }
    if (hits == 0) {
      row.setConstant(uniform);
    } else {
      row /= static_cast<double>(hits);
    }
  });

  if (cfg.full_config_model) {
    const Vector<double> out_mass = batch.similarity.rowwise().sum();
    const Eigen::Matrix<double, 1, Eigen::Dynamic> in_mass =
        batch.similarity.colwise().sum();
    const double total = out_mass.sum();
    batch.modularity = batch.similarity - (out_mass * in_mass) / total;
  } else {
    batch.modularity = batch.similarity.array() - uniform;
  }
  return batch;
}

}  // namespace magi
