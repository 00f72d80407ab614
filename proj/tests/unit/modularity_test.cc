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


#include <doctest.h>

#include <random>

#include "magi/modularity.h"
#include "magi/synthetic.h"
#include "oracle.h"

namespace magi {
namespace {

using EdgeVec = std::vector<std::pair<NodeId, NodeId>>;

Partition random_partition(NodeId n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> labels(n);
  for (int& x : labels) x = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
  return Partition::from_labels(labels);
}

TEST_CASE("single community has zero modularity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CsrGraph g = erdos_renyi(40, 0.1, seed);
    const Partition one = Partition::from_labels(std::vector<int>(40, 0));
    CHECK(std::abs(global_modularity(g, one)) < 1e-12);
  }
}

TEST_CASE("two disjoint triangles") {
  const PlantedGraph t = disjoint_cliques(2, 3);
  CHECK(global_modularity(t.graph, t.labels) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(oracle::brute_modularity(t.graph, t.labels) == doctest::Approx(0.5).epsilon(1e-12));
  const Partition split = Partition::from_labels({0, 0, 1, 2, 2, 3});
  CHECK(global_modularity(t.graph, split) < 0.5);
}

TEST_CASE("single edge dense matrix") {
  const EdgeVec e = {{0, 1}};
  const auto b = dense_modularity_matrix(CsrGraph::from_edges(2, e));
  CHECK(b(0, 0) == -0.5);
  CHECK(b(0, 1) == 0.5);
  CHECK(b(1, 0) == 0.5);
  CHECK(b(1, 1) == -0.5);
}

TEST_CASE("dense matrix equals A - dd/2m exactly") {
  const CsrGraph g = erdos_renyi(25, 0.2, 4);
  const auto b = dense_modularity_matrix(g);
  const Matrix<double> a = oracle::dense_adjacency(g);
  const double two_m = 2.0 * static_cast<double>(g.num_edges());
  for (NodeId i = 0; i < 25; ++i) {
    for (NodeId j = 0; j < 25; ++j) {
      CHECK(b(i, j) == a(i, j) - static_cast<double>(g.degree(i)) * g.degree(j) / two_m);
    }
  }
  CHECK((b.values - b.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("property: sparse, brute and trace forms agree with bounded Q") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const CsrGraph g = erdos_renyi(20 + static_cast<NodeId>(seed) * 3, 0.12, seed);
    if (g.num_edges() == 0) continue;
    const auto b = dense_modularity_matrix(g);
    CHECK(b.values.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9);
    const double two_m = 2.0 * static_cast<double>(g.num_edges());
    for (int k : {2, 3, 7}) {
      const Partition p = random_partition(g.num_nodes(), k, seed * 10 + k);
      const double q = global_modularity(g, p);
      CHECK(std::abs(q - oracle::trace_modularity(b, p, two_m)) < 1e-9);
      CHECK(std::abs(q - oracle::brute_modularity(g, p)) < 1e-9);
      CHECK(q <= 1.0);
      CHECK(q >= -0.5);
    }
  }
}

TEST_CASE("errors") {
  const CsrGraph empty = CsrGraph::from_edges(3, EdgeVec{});
  CHECK_THROWS_AS(global_modularity(empty, Partition::from_labels({0, 0, 1})),
                  InvalidArgument);
  const CsrGraph g = erdos_renyi(30, 0.2, 1);
  CHECK_THROWS_AS(global_modularity(g, Partition::from_labels({0, 1})), InvalidArgument);
  CHECK_THROWS_AS(dense_modularity_matrix(g, 10), CapacityExceeded);
  CHECK_THROWS_AS(high_order_modularity_matrix(g, 2, 10), CapacityExceeded);
  CHECK_THROWS_AS(high_order_modularity_matrix(g, 0), InvalidArgument);
}

TEST_CASE("high order: order 1 is a scaled dense matrix") {
  const CsrGraph g = erdos_renyi(30, 0.15, 9);
  const auto b = dense_modularity_matrix(g);
  const auto h = high_order_modularity_matrix(g, 1);
  const double two_m = 2.0 * static_cast<double>(g.num_edges());
  CHECK((h.values - b.values / two_m).cwiseAbs().maxCoeff() < 1e-15);
  for (NodeId i = 0; i < 30; ++i) {
    for (NodeId j = 0; j < 30; ++j) CHECK((h(i, j) > 0) == (b(i, j) > 0));
  }
}

TEST_CASE("high order: path 0-1-2 makes two-hop pairs positive") {
  const EdgeVec path = {{0, 1}, {1, 2}};
  const CsrGraph g = CsrGraph::from_edges(3, path);
  CHECK(dense_modularity_matrix(g)(0, 2) < 0);
  const auto h = high_order_modularity_matrix(g, 2);
  CHECK(h(0, 2) > 0);
  CHECK(h(0, 2) == doctest::Approx(0.109).epsilon(0.01));
}

TEST_CASE("high order: symmetric with zero row sums") {
  for (int order : {1, 2, 3}) {
    const auto h = high_order_modularity_matrix(erdos_renyi(40, 0.1, order), order);
    CHECK((h.values - h.values.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(h.values.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9);
  }
}

}  // namespace
}  // namespace magi
