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

#include "magi/modularity.h"

#include <string>
#include <vector>

namespace magi {

namespace {

void check_cap(const CsrGraph& graph, NodeId cap) {
  if (graph.num_nodes() > cap) {
    throw CapacityExceeded(
        "dense modularity matrix refused: " + std::to_string(graph.num_nodes()) +
        " nodes exceeds the oracle-only cap of " + std::to_string(cap));
  }
  if (graph.num_edges() == 0) {
    throw InvalidArgument("modularity is undefined for a graph without edges");
  }
}

// out = A * in for a dense right-hand side.
Matrix<double> sparse_times_dense(const CsrGraph& graph,
                                  const Matrix<double>& in) {
  Matrix<double> out = Matrix<double>::Zero(in.rows(), in.cols());
  for (NodeId u = 0; u < graph.num_nodes(); ++u) {
    for (NodeId v : graph.neighbors(u)) out.row(u) += in.row(v);
  }
  return out;
}

}  // namespace

double global_modularity(const CsrGraph& graph, const Partition& partition) {
  if (graph.num_edges() == 0) {
    throw InvalidArgument("modularity is undefined for a graph without edges");
  }
  if (partition.size() != graph.num_nodes()) {
    throw InvalidArgument("partition covers " +
                          std::to_string(partition.size()) +
                          " nodes, graph has " +
                          std::to_string(graph.num_nodes()));
  }
  const double two_m = 2.0 * static_cast<double>(graph.num_edges());
  std::vector<double> cluster_degree(
      static_cast<std::size_t>(partition.num_clusters), 0.0);
  double intra_arcs = 0.0;
  for (NodeId u = 0; u < graph.num_nodes(); ++u) {
    const int cu = partition.assignment[u];
    cluster_degree[cu] += graph.degree(u);
    for (NodeId v : graph.neighbors(u)) {
      if (partition.assignment[v] == cu) intra_arcs += 1.0;
    }
  }
  double expected = 0.0;
  for (double dc : cluster_degree) expected += dc * dc;
  return intra_arcs / two_m - expected / (two_m * two_m);
}

DenseModularityMatrix dense_modularity_matrix(const CsrGraph& graph,
                                              NodeId cap) {
  check_cap(graph, cap);
  const NodeId n = graph.num_nodes();
  const double two_m = 2.0 * static_cast<double>(graph.num_edges());
  Vector<double> d(n);
  for (NodeId i = 0; i < n; ++i) d(i) = graph.degree(i);
  DenseModularityMatrix b;
  b.values = -(d * d.transpose()) / two_m;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v : graph.neighbors(u)) b.values(u, v) += 1.0;
  }
  return b;
}

DenseModularityMatrix high_order_modularity_matrix(const CsrGraph& graph,
                                                   int order, NodeId cap) {
  if (order < 1) {
    throw InvalidArgument("high-order modularity needs order >= 1");
  }
  check_cap(graph, cap);
  const NodeId n = graph.num_nodes();

  Matrix<double> power = Matrix<double>::Identity(n, n);
  Matrix<double> walk = Matrix<double>::Zero(n, n);
  int used = 0;
  for (int k = 1; k <= order; ++k) {
    power = sparse_times_dense(graph, power);
    Matrix<double> off = power;
    off.diagonal().setZero();
    const double mass = off.sum();
    if (mass <= 0.0) continue;
    walk += off / mass;
    ++used;
  }
  walk /= static_cast<double>(used);

  const Vector<double> strength = walk.rowwise().sum();
  const double total = strength.sum();
  DenseModularityMatrix b;
  b.values = walk - (strength * strength.transpose()) / total;
  return b;
}

}  // namespace magi
