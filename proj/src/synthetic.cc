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

#include "magi/synthetic.h"

#include <cmath>
#include <random>
#include <utility>

#include "magi/rng.h"

namespace magi {

namespace {

using EdgeVec = std::vector<std::pair<NodeId, NodeId>>;

// Bernoulli(p) over `count` linearized slots; calls emit(index) per success.
template <typename Emit>
void skip_sample(std::int64_t count, double p, Rng& rng, Emit emit) {
  if (p <= 0.0 || count <= 0) return;
  if (p >= 1.0) {
    for (std::int64_t i = 0; i < count; ++i) emit(i);
    return;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_q = std::log1p(-p);
  std::int64_t i = -1;
  while (true) {
    const double r = unif(rng);
    i += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
    if (i >= count) return;
    emit(i);
  }
}

// Slot -> (row, col) with col > row within a block of n nodes (upper triangle).
std::pair<std::int64_t, std::int64_t> triangle_slot(std::int64_t idx, std::int64_t n) {
  // Row r starts at r*n - r*(r+1)/2; solve by walking from an estimate.
  auto start = [n](std::int64_t r) { return r * n - r * (r + 1) / 2; };
  const double nn = static_cast<double>(n);
  auto r = static_cast<std::int64_t>(
      std::floor(nn - 0.5 - std::sqrt((nn - 0.5) * (nn - 0.5) - 2.0 * static_cast<double>(idx))));
  if (r < 0) r = 0;
  while (r > 0 && start(r) > idx) --r;
  while (start(r + 1) <= idx) ++r;
  return {r, r + 1 + (idx - start(r))};
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

CsrGraph erdos_renyi(NodeId num_nodes, double p, std::uint64_t seed) {
  check_probability(p, "p");
  if (num_nodes < 0) throw InvalidArgument("num_nodes must be >= 0");
  Rng rng = make_stream(seed, StreamKind::kGraph, {0});
  EdgeVec edges;
  const std::int64_t n = num_nodes;
  skip_sample(n * (n - 1) / 2, p, rng, [&](std::int64_t idx) {
    auto [u, v] = triangle_slot(idx, n);
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  });
  return CsrGraph::from_edges(num_nodes, edges);
}

PlantedGraph stochastic_block_model(const std::vector<NodeId>& block_sizes,
                                    double p_in, double p_out, std::uint64_t seed) {
  check_probability(p_in, "p_in");
  check_probability(p_out, "p_out");
  std::vector<std::int64_t> offset{0};
  std::vector<int> labels;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    if (block_sizes[b] < 1) throw InvalidArgument("block sizes must be >= 1");
    offset.push_back(offset.back() + block_sizes[b]);
    labels.insert(labels.end(), block_sizes[b], static_cast<int>(b));
  }
  EdgeVec edges;
  for (std::size_t a = 0; a < block_sizes.size(); ++a) {
    for (std::size_t b = a; b < block_sizes.size(); ++b) {
      Rng rng = make_stream(seed, StreamKind::kGraph, {a, b});
      const std::int64_t na = block_sizes[a];
      const std::int64_t nb = block_sizes[b];
      if (a == b) {
        skip_sample(na * (na - 1) / 2, p_in, rng, [&](std::int64_t idx) {
          auto [u, v] = triangle_slot(idx, na);
          edges.emplace_back(static_cast<NodeId>(offset[a] + u),
                             static_cast<NodeId>(offset[a] + v));
        });
      } else {
        skip_sample(na * nb, p_out, rng, [&](std::int64_t idx) {
          edges.emplace_back(static_cast<NodeId>(offset[a] + idx / nb),
                             static_cast<NodeId>(offset[b] + idx % nb));
        });
      }
    }
  }
  PlantedGraph out;
  out.graph = CsrGraph::from_edges(static_cast<NodeId>(offset.back()), edges);
  out.labels = Partition::from_labels(std::move(labels));
  return out;
}

CsrGraph barbell(NodeId clique_size) {
  if (clique_size < 2) throw InvalidArgument("barbell cliques need >= 2 nodes");
  EdgeVec edges;
  for (NodeId side = 0; side < 2; ++side) {
    const NodeId base = side * clique_size;
    for (NodeId i = 0; i < clique_size; ++i) {
      for (NodeId j = i + 1; j < clique_size; ++j) edges.emplace_back(base + i, base + j);
    }
  }
  edges.emplace_back(clique_size - 1, clique_size);
  return CsrGraph::from_edges(2 * clique_size, edges);
}

PlantedGraph disjoint_cliques(int num_cliques, NodeId clique_size) {
  if (num_cliques < 1 || clique_size < 2) {
    throw InvalidArgument("need >= 1 clique of >= 2 nodes");
  }
  EdgeVec edges;
  std::vector<int> labels;
  for (int c = 0; c < num_cliques; ++c) {
    const NodeId base = c * clique_size;
    for (NodeId i = 0; i < clique_size; ++i) {
      labels.push_back(c);
      for (NodeId j = i + 1; j < clique_size; ++j) edges.emplace_back(base + i, base + j);
    }
  }
  return {CsrGraph::from_edges(num_cliques * clique_size, edges),
          Partition::from_labels(std::move(labels))};
}

FeatureMatrix block_features(const Partition& labels, int dim, double shift,
                             std::uint64_t seed) {
  if (dim < 1) throw InvalidArgument("feature dim must be >= 1");
  const int blocks = std::max(labels.num_clusters, 1);
  const int slice = std::max(dim / blocks, 1);
  Rng rng = make_stream(seed, StreamKind::kFeatures, {1});
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Real> values(static_cast<std::size_t>(labels.size()) * dim);
  for (NodeId i = 0; i < labels.size(); ++i) {
    const int lo = (labels.assignment[i] * slice) % dim;
    for (int c = 0; c < dim; ++c) {
      double x = gauss(rng);
      if (c >= lo && c < lo + slice) x += shift;
      values[static_cast<std::size_t>(i) * dim + c] = static_cast<Real>(x);
    }
  }
  return FeatureMatrix(labels.size(), dim, std::move(values));
}

}  // namespace magi
