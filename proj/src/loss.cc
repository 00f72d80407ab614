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

#include "magi/loss.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "magi/parallel.h"

namespace magi {

namespace {

// Builds pair sets from a predicate over local index pairs (u != v).
template <typename IsPositive>
PairSets pairs_from_predicate(NodeId n, IsPositive&& is_positive) {
  PairSets pairs;
  pairs.positives.resize(n);
  pairs.negatives.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u = 0; u < n; ++u) {
      if (u == v) continue;
      (is_positive(v, u) ? pairs.positives[v] : pairs.negatives[v]).push_back(u);
    }
  }
  return pairs;
}

// Sparse variant: positives come from an adjacency-derived list, negatives are
// the complement. `pos[v]` must be sorted and exclude v.
PairSets pairs_from_positive_lists(std::vector<std::vector<NodeId>> pos) {
  const NodeId n = static_cast<NodeId>(pos.size());
  PairSets pairs;
  pairs.negatives.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    auto& neg = pairs.negatives[v];
    neg.reserve(n - 1 - pos[v].size());
    auto it = pos[v].begin();
    for (NodeId u = 0; u < n; ++u) {
      if (it != pos[v].end() && *it == u) {
        ++it;
        continue;
      }
      if (u != v) neg.push_back(u);
    }
  }
  pairs.positives = std::move(pos);
  return pairs;
}

// In-batch neighbors of each member, optionally filtered by an edge predicate.
template <typename Keep>
std::vector<std::vector<NodeId>> in_batch_edges(const CsrGraph& graph,
                                                std::span<const NodeId> members,
                                                Keep&& keep) {
  std::vector<std::vector<NodeId>> pos(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const NodeId g = members[i];
    for (NodeId w : graph.neighbors(g)) {
      auto it = std::lower_bound(members.begin(), members.end(), w);
      if (it != members.end() && *it == w && keep(g, w)) {
        pos[i].push_back(static_cast<NodeId>(it - members.begin()));
      }
    }
  }
  return pos;
}

void check_sorted_members(std::span<const NodeId> members) {
  if (!std::is_sorted(members.begin(), members.end()) ||
      std::adjacent_find(members.begin(), members.end()) != members.end()) {
    throw InvalidArgument("batch members must be sorted and distinct");
  }
}

void check_pairs_shape(NodeId rows, const PairSets& pairs) {
  if (pairs.size() != rows || static_cast<NodeId>(pairs.negatives.size()) != rows) {
    throw InvalidArgument("pair sets cover " + std::to_string(pairs.size()) +
                          " anchors, embedding has " + std::to_string(rows) +
                          " rows");
  }
}

}  // namespace

std::string to_string(PairRule rule) {
  switch (rule) {
    case PairRule::kMagi: return "magi";
    case PairRule::kModularity: return "ms";
    case PairRule::kEdgeIndicator: return "ei";
    case PairRule::kHighOrder: return "hms";
  }
  return "?";
}

std::string to_string(LossKind kind) {
  return kind == LossKind::kSimclr ? "simclr" : "simple";
}

PairRule parse_pair_rule(const std::string& name) {
  if (name == "magi") return PairRule::kMagi;
  if (name == "ms") return PairRule::kModularity;
  if (name == "ei") return PairRule::kEdgeIndicator;
  if (name == "hms") return PairRule::kHighOrder;
  throw InvalidArgument("unknown pair rule '" + name + "'");
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "simclr") return LossKind::kSimclr;
  if (name == "simple" || name == "sl") return LossKind::kSimple;
  throw InvalidArgument("unknown loss '" + name + "'");
}

NodeId PairSets::num_active() const {
  NodeId n = 0;
  for (const auto& p : positives) n += p.empty() ? 0 : 1;
  return n;
}

std::int64_t PairSets::num_positive_pairs() const {
  std::int64_t n = 0;
  for (const auto& p : positives) n += static_cast<std::int64_t>(p.size());
  return n;
}

PairSets derive_pairs_from_scores(const Matrix<double>& scores) {
  if (scores.rows() != scores.cols()) {
    throw InvalidArgument("pair scores must be square");
  }
  return pairs_from_predicate(static_cast<NodeId>(scores.rows()),
                              [&](NodeId v, NodeId u) { return scores(v, u) > 0.0; });
}

PairSets derive_pairs(const Batch& batch) {
  return derive_pairs_from_scores(batch.modularity);
}

PairSets derive_pairs_edge_indicator(const CsrGraph& graph,
                                     std::span<const NodeId> members) {
  check_sorted_members(members);
  return pairs_from_positive_lists(
      in_batch_edges(graph, members, [](NodeId, NodeId) { return true; }));
}

PairSets derive_pairs_modularity_sign(const CsrGraph& graph,
                                      std::span<const NodeId> members) {
  check_sorted_members(members);
  // Off-edge entries are -d_i d_j / 2m <= 0, so only edges can be positive.
  const double two_m = 2.0 * static_cast<double>(graph.num_edges());
  return pairs_from_positive_lists(in_batch_edges(
      graph, members, [&](NodeId a, NodeId b) {
        return 1.0 - static_cast<double>(graph.degree(a)) * graph.degree(b) / two_m > 0.0;
      }));
}

PairSets derive_pairs_high_order(const DenseModularityMatrix& high_order,
                                 std::span<const NodeId> members) {
  check_sorted_members(members);
  for (NodeId g : members) {
    if (g < 0 || g >= high_order.size()) {
      throw InvalidArgument("member " + std::to_string(g) +
                            " outside the high-order matrix");
    }
  }
  return pairs_from_predicate(static_cast<NodeId>(members.size()),
                              [&](NodeId v, NodeId u) {
                                return high_order(members[v], members[u]) > 0.0;
                              });
}

template <typename T>
LossResult<T> simclr_loss(const Matrix<T>& z, const PairSets& pairs, double tau,
                          bool per_pair_denominator) {
  if (!(tau > 0.0)) throw InvalidArgument("temperature must be positive");
  const NodeId n = static_cast<NodeId>(z.rows());
  check_pairs_shape(n, pairs);
  const NodeId active = pairs.num_active();
  if (active == 0) throw InvalidArgument("simclr_loss: no active anchors");

  const T inv_tau = static_cast<T>(1.0 / tau);
  const Matrix<T> logits = (z * z.transpose()) * inv_tau;
  Matrix<T> g = Matrix<T>::Zero(n, n);
  std::vector<double> anchor_loss(static_cast<std::size_t>(n), 0.0);

  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t vi) {
    const auto v = static_cast<NodeId>(vi);
    const auto& pos = pairs.positives[v];
    const auto& neg = pairs.negatives[v];
    if (pos.empty()) return;
    auto s = logits.row(v);
    T shift = -std::numeric_limits<T>::infinity();
    for (NodeId u : pos) shift = std::max(shift, s(u));
    for (NodeId u : neg) shift = std::max(shift, s(u));
    auto grow = g.row(v);

    double neg_mass = 0.0;
    for (NodeId u : neg) neg_mass += std::exp(static_cast<double>(s(u) - shift));

    if (!per_pair_denominator) {
      double pos_mass = 0.0;
      for (NodeId u : pos) pos_mass += std::exp(static_cast<double>(s(u) - shift));
      const double total = pos_mass + neg_mass;
      const double log_total = std::log(total) + static_cast<double>(shift);
      const double k = static_cast<double>(pos.size());
      double loss = 0.0;
      for (NodeId u : pos) {
        loss += log_total - static_cast<double>(s(u));
        grow(u) = static_cast<T>(
            k * std::exp(static_cast<double>(s(u) - shift)) / total - 1.0);
      }
      for (NodeId u : neg) {
        grow(u) = static_cast<T>(k * std::exp(static_cast<double>(s(u) - shift)) / total);
      }
      anchor_loss[v] = loss;
    } else {
      double loss = 0.0;
      double neg_weight = 0.0;  // sum_p 1 / D_p, in shifted units
      for (NodeId u : pos) {
        const double ep = std::exp(static_cast<double>(s(u) - shift));
        const double denom = ep + neg_mass;
        loss += std::log(denom) - std::log(ep);
        grow(u) = static_cast<T>(ep / denom - 1.0);
        neg_weight += 1.0 / denom;
      }
      for (NodeId u : neg) {
        grow(u) = static_cast<T>(std::exp(static_cast<double>(s(u) - shift)) * neg_weight);
      }
      anchor_loss[v] = loss;
    }
  });

  double total_loss = 0.0;
  for (double l : anchor_loss) total_loss += l;
  const T scale = static_cast<T>(1.0 / static_cast<double>(active));
  g *= scale;

  LossResult<T> out;
  out.report = {total_loss / active, active, tau};
  out.grad = ((g + g.transpose()) * z) * inv_tau;
  return out;
}

template <typename T>
LossResult<T> simple_loss(const Matrix<T>& z, const PairSets& pairs) {
  const NodeId n = static_cast<NodeId>(z.rows());
  check_pairs_shape(n, pairs);
  const Matrix<T> sim = z * z.transpose();
  Matrix<T> g = Matrix<T>::Zero(n, n);
  double total = 0.0;
  NodeId active = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (!pairs.active(v)) continue;
    ++active;
    for (NodeId u : pairs.positives[v]) {
      total -= static_cast<double>(sim(v, u));
      g(v, u) = T(-1);
    }
    for (NodeId u : pairs.negatives[v]) {
      total += static_cast<double>(sim(v, u));
      g(v, u) = T(1);
    }
  }
  LossResult<T> out;
  out.report = {total, active, 0.0};
  out.grad = (g + g.transpose()) * z;
  return out;
}

template LossResult<float> simclr_loss(const Matrix<float>&, const PairSets&, double, bool);
template LossResult<double> simclr_loss(const Matrix<double>&, const PairSets&, double, bool);
template LossResult<float> simple_loss(const Matrix<float>&, const PairSets&);
template LossResult<double> simple_loss(const Matrix<double>&, const PairSets&);

}  // namespace magi
