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

#include <numeric>

#include "magi/parallel.h"
#include "magi/rng.h"
#include "magi/synthetic.h"
#include "magi/walk.h"
#include "oracle.h"

namespace magi {
namespace {

using EdgeVec = std::vector<std::pair<NodeId, NodeId>>;

VisitCounts make_counts(std::vector<std::pair<NodeId, std::int64_t>> c) {
  VisitCounts v;
  v.counts = std::move(c);
  for (auto [n, k] : v.counts) v.total += k;
  return v;
}

std::vector<NodeId> iota_nodes(NodeId n) {
  std::vector<NodeId> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TEST_CASE("walks on a single edge") {
  const EdgeVec e = {{0, 1}};
  const CsrGraph g = CsrGraph::from_edges(2, e);
  Rng rng(1);
  const VisitCounts v = random_walk_counts(g, 0, 4, 1, rng);
  CHECK(v.counts == std::vector<std::pair<NodeId, std::int64_t>>{{1, 4}});
  CHECK(v.total == 4);
}

TEST_CASE("triangle walks split evenly") {
  const PlantedGraph t = disjoint_cliques(1, 3);
  Rng rng(2);
  const VisitCounts v = random_walk_counts(t.graph, 0, 20000, 1, rng);
  CHECK(v.count_of(0) == 0);
  CHECK(v.count_of(1) + v.count_of(2) == 20000);
  CHECK(std::abs(v.count_of(1) - 10000) < 500);  // ~7 sigma
}

TEST_CASE("path: the far end needs two steps") {
  const EdgeVec p = {{0, 1}, {1, 2}};
  const CsrGraph g = CsrGraph::from_edges(3, p);
  Rng rng(3);
  CHECK(random_walk_counts(g, 0, 1000, 1, rng).count_of(2) == 0);
  const VisitCounts two = random_walk_counts(g, 0, 1000, 2, rng);
  CHECK(two.count_of(1) == 1000);
  CHECK(two.count_of(2) > 0);
  CHECK(two.count_of(0) == 0);
  CHECK(two.total == two.count_of(1) + two.count_of(2));
}

TEST_CASE("isolated roots yield no visits") {
  const EdgeVec e = {{0, 1}};
  const CsrGraph g = CsrGraph::from_edges(3, e);
  Rng rng(4);
  CHECK(random_walk_counts(g, 2, 10, 2, rng).empty());
  const std::vector<NodeId> roots = {2};
  CHECK(build_batch(g, roots, WalkConfig{}, 0).empty());
}

TEST_CASE("sub-community filter") {
  CHECK(filter_sub_community(9, make_counts({{1, 5}, {2, 3}, {3, 1}, {4, 1}})) ==
        std::vector<NodeId>{1, 2, 9});
  CHECK(filter_sub_community(0, make_counts({{1, 2}, {2, 2}, {3, 2}})) ==
        std::vector<NodeId>{0});
  CHECK(filter_sub_community(0, make_counts({{5, 10}})) == std::vector<NodeId>{0, 5});
  CHECK(filter_sub_community(3, VisitCounts{}) == std::vector<NodeId>{3});
}

TEST_CASE("batches cover disjoint cliques") {
  const PlantedGraph c = disjoint_cliques(3, 5);
  WalkConfig cfg;
  cfg.num_walks = 200;
  cfg.depth = 1;
  const std::vector<NodeId> roots = {0, 10};
  const auto batch = build_batch(c.graph, roots, cfg, 0);
  std::vector<NodeId> expect;
  for (NodeId v = 0; v < 5; ++v) expect.push_back(v);
  for (NodeId v = 10; v < 15; ++v) expect.push_back(v);
  // Every clique neighbour gets ~t/4 visits; those above the mean survive, so
  // the union of both roots' filters stays inside their two cliques.
  for (NodeId v : batch) CHECK(std::find(expect.begin(), expect.end(), v) != expect.end());

  const auto all = iota_nodes(15);
  CHECK(build_batch(c.graph, all, cfg, 0) == all);
}

TEST_CASE("all roots on a connected graph cover every node") {
  const CsrGraph g = barbell(5);
  WalkConfig cfg;
  cfg.num_walks = 500;
  cfg.depth = 3;
  const auto all = iota_nodes(10);
  CHECK(build_batch(g, all, cfg, 1) == all);
}

TEST_CASE("deterministic similarity on two disjoint edges") {
  const EdgeVec e = {{0, 1}, {2, 3}};
  const CsrGraph g = CsrGraph::from_edges(4, e);
  WalkConfig cfg;
  cfg.num_walks = 7;
  cfg.depth = 1;
  const auto members = iota_nodes(4);
  const Batch b = batch_similarity(g, members, cfg, 0);
  CHECK(b.similarity(0, 0) == 0.0);
  CHECK(b.similarity(0, 1) == 1.0);
  CHECK(b.similarity(0, 2) == 0.0);
  CHECK(b.modularity(0, 0) == -0.25);
  CHECK(b.modularity(0, 1) == 0.75);
  CHECK(b.modularity(0, 3) == -0.25);
  CHECK(*b.local_of(3) == 3);
}

TEST_CASE("rows without in-batch hits become uniform") {
  const EdgeVec e = {{0, 1}, {2, 3}};
  const CsrGraph g = CsrGraph::from_edges(5, e);
  const std::vector<NodeId> members = {0, 2, 4};
  WalkConfig cfg;
  cfg.depth = 1;
  const Batch b = batch_similarity(g, members, cfg, 0);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) CHECK(b.similarity(r, c) == doctest::Approx(1.0 / 3));
  }
  CHECK(b.modularity.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("errors") {
  const CsrGraph g = barbell(3);
  const std::vector<NodeId> one = {0};
  CHECK_THROWS_AS(batch_similarity(g, one, WalkConfig{}, 0), InvalidArgument);
  WalkConfig bad;
  bad.num_walks = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = {};
  bad.depth = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = {};
  bad.num_roots = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("property: row sums, ranges and determinism over random batches") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PlantedGraph sbm = stochastic_block_model({30, 30, 30}, 0.2, 0.02, seed);
    WalkConfig cfg;
    cfg.num_walks = 20;
    cfg.depth = 1 + static_cast<int>(seed % 3);
    cfg.seed = seed;
    cfg.full_config_model = seed % 2 == 1;
    std::vector<NodeId> roots;
    for (NodeId v = static_cast<NodeId>(seed % 5); v < 90; v += 7) roots.push_back(v);
    const auto members = build_batch(sbm.graph, roots, cfg, seed);
    REQUIRE(members.size() >= 2);
    CHECK(std::is_sorted(members.begin(), members.end()));
    const Batch b = batch_similarity(sbm.graph, members, cfg, seed);
    const Batch again = batch_similarity(sbm.graph, members, cfg, seed);
    CHECK(b.similarity == again.similarity);
    CHECK(b.modularity == again.modularity);
    CHECK(build_batch(sbm.graph, roots, cfg, seed) == members);

    CHECK((b.similarity.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(b.modularity.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9);
    CHECK(b.similarity.minCoeff() >= 0.0);
    CHECK(b.similarity.maxCoeff() <= 1.0);
    if (!cfg.full_config_model) {
      const double inv = 1.0 / static_cast<double>(b.size());
      CHECK(((b.similarity.array() - inv) - b.modularity.array()).abs().maxCoeff() == 0.0);
      CHECK(b.modularity.minCoeff() >= -inv);
      CHECK(b.modularity.maxCoeff() <= 1.0 - inv);
    }
  }
}

TEST_CASE("determinism does not depend on the thread count") {
  const PlantedGraph sbm = stochastic_block_model({40, 40}, 0.2, 0.02, 5);
  WalkConfig cfg;
  const auto all = iota_nodes(80);
  const int saved = thread_count();
  set_thread_count(1);
  const auto m1 = build_batch(sbm.graph, all, cfg, 3);
  const Batch b1 = batch_similarity(sbm.graph, m1, cfg, 3);
  set_thread_count(4);
  const auto m4 = build_batch(sbm.graph, all, cfg, 3);
  const Batch b4 = batch_similarity(sbm.graph, m4, cfg, 3);
  set_thread_count(saved);
  CHECK(m1 == m4);
  CHECK(b1.similarity == b4.similarity);
}

TEST_CASE("convergence to transition-matrix powers on a barbell") {
  const CsrGraph g = barbell(4);
  const auto members = iota_nodes(8);
  for (int depth = 1; depth <= 3; ++depth) {
    WalkConfig cfg;
    cfg.num_walks = 10000;
    cfg.depth = depth;
    const Batch b = batch_similarity(g, members, cfg, 0);
    const Matrix<double> limit = oracle::walk_similarity_limit(g, members, depth);
    for (int r = 0; r < 8; ++r) {
      CHECK((b.similarity.row(r) - limit.row(r)).cwiseAbs().sum() < 0.05);
    }
  }
}

TEST_CASE("depth-one positives are edges") {
  const PlantedGraph sbm = stochastic_block_model({20, 20}, 0.3, 0.05, 2);
  WalkConfig cfg;
  cfg.num_walks = 5000;
  cfg.depth = 1;
  const auto members = iota_nodes(40);
  const Batch b = batch_similarity(sbm.graph, members, cfg, 0);
  for (NodeId v = 0; v < 40; ++v) {
    for (NodeId u = 0; u < 40; ++u) {
      if (u != v && b.similarity(v, u) > 1.0 / 40) CHECK(sbm.graph.has_edge(v, u));
    }
  }
}

}  // namespace
}  // namespace magi
