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

#include "magi/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "magi/parallel.h"
#include "magi/rng.h"

namespace magi {

namespace {

struct Contingency {
  // table[p][t] over compacted labels.
  std::vector<std::vector<std::int64_t>> table;
  std::vector<std::int64_t> pred_sizes;
  std::vector<std::int64_t> true_sizes;
  std::int64_t n = 0;
};

std::vector<int> compact(const std::vector<int>& labels, int num_clusters) {
  std::vector<int> id(static_cast<std::size_t>(num_clusters), -1);
  int next = 0;
  std::vector<int> out(labels.size());
  // Ascending label order keeps the compaction deterministic.
  std::vector<char> seen(static_cast<std::size_t>(num_clusters), 0);
  for (int l : labels) seen[l] = 1;
  for (int c = 0; c < num_clusters; ++c) {
    if (seen[c]) id[c] = next++;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = id[labels[i]];
  return out;
}

Contingency contingency(const Partition& pred, const Partition& truth) {
  if (pred.size() != truth.size()) {
    throw InvalidArgument("partitions differ in size: " +
                          std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()));
  }
  if (pred.size() == 0) throw InvalidArgument("empty partitions");
  const auto p = compact(pred.assignment, pred.num_clusters);
  const auto t = compact(truth.assignment, truth.num_clusters);
  const int kp = *std::max_element(p.begin(), p.end()) + 1;
  const int kt = *std::max_element(t.begin(), t.end()) + 1;
  Contingency c;
  c.table.assign(kp, std::vector<std::int64_t>(kt, 0));
  c.pred_sizes.assign(kp, 0);
  c.true_sizes.assign(kt, 0);
  c.n = pred.size();
  for (std::size_t i = 0; i < p.size(); ++i) {
    ++c.table[p[i]][t[i]];
    ++c.pred_sizes[p[i]];
    ++c.true_sizes[t[i]];
  }
  return c;
}

// Minimum-cost perfect assignment on a square matrix (Kuhn-Munkres with
// potentials). Returns row_to_col.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

// mapping over compacted labels.
std::vector<int> compact_mapping(const Contingency& c) {
  const int kp = static_cast<int>(c.pred_sizes.size());
  const int kt = static_cast<int>(c.true_sizes.size());
  const int n = std::max(kp, kt);
  // Agreement first; among agreement-optimal mappings prefer the larger summed
  // F1, so the result does not depend on how predicted clusters are numbered.
  // The F1 term totals at most min(kp, kt) / (n + 1) < 1, below one count.
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (int p = 0; p < kp; ++p) {
    for (int t = 0; t < kt; ++t) {
      const double tp = static_cast<double>(c.table[p][t]);
      const double f1 = 2.0 * tp / static_cast<double>(c.pred_sizes[p] + c.true_sizes[t]);
      cost[p][t] = -(tp + f1 / static_cast<double>(n + 1));
    }
  }
  auto assign = hungarian(cost);
  std::vector<int> mapping(kp, -1);
  for (int p = 0; p < kp; ++p) {
    if (assign[p] < kt) mapping[p] = assign[p];
  }
  return mapping;
}

double choose2(std::int64_t x) {
  return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1);
}

double entropy(const std::vector<std::int64_t>& sizes, std::int64_t n) {
  double h = 0.0;
  for (auto s : sizes) {
    if (s == 0) continue;
    const double p = static_cast<double>(s) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

struct LloydRun {
  Matrix<double> centers;
  std::vector<int> assignment;
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

double squared_distance(const Matrix<double>& points, Eigen::Index i,
                        const Matrix<double>& centers, Eigen::Index c) {
  return (points.row(i) - centers.row(c)).squaredNorm();
}

LloydRun lloyd(const Matrix<double>& points, int k, Rng& rng, int max_iterations) {
  const Eigen::Index n = points.rows();
  LloydRun run;
  run.centers.resize(k, points.cols());

  // k-means++ seeding.
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  Eigen::Index pick = first(rng);
  for (int c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
      if (total > 0.0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng);
        pick = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (chosen[i]) continue;
          r -= d2[i];
          pick = i;
          if (r <= 0.0) break;
        }
      } else {
        // Remaining points coincide with centers; take an unchosen one.
        std::vector<Eigen::Index> left;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (!chosen[i]) left.push_back(i);
        }
        std::uniform_int_distribution<std::size_t> any(0, left.size() - 1);
        pick = left[any(rng)];
      }
    }
    chosen[pick] = 1;
    run.centers.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points, i, run.centers, c));
    }
  }

  run.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
  for (int it = 0; it < max_iterations; ++it) {
    // Assignment step; ties go to the lowest center index.
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, run.centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points, i, run.centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.assignment[i] != best) changed = true;
      run.assignment[i] = best;
      dist[i] = best_d;
    }
    // Empty-cluster repair: move the farthest point into each empty cluster.
    std::vector<std::int64_t> sizes(k, 0);
    for (int a : run.assignment) ++sizes[a];
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (sizes[run.assignment[i]] > 1 && (far < 0 || dist[i] > dist[far])) far = i;
      }
      if (far < 0) break;
      --sizes[run.assignment[far]];
      run.assignment[far] = c;
      ++sizes[c];
      dist[far] = 0.0;
      run.centers.row(c) = points.row(far);
      changed = true;
    }
    // Update step.
    run.centers.setZero();
    for (Eigen::Index i = 0; i < n; ++i) run.centers.row(run.assignment[i]) += points.row(i);
    for (int c = 0; c < k; ++c) run.centers.row(c) /= static_cast<double>(sizes[c]);

    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      inertia += squared_distance(points, i, run.centers, run.assignment[i]);
    }
    run.trace.push_back(inertia);
    run.inertia = inertia;
    run.iterations = it + 1;
    if (!changed) break;
  }
  return run;
}

}  // namespace

KMeansResult kmeans(const Matrix<double>& points, int k, std::uint64_t seed,
                    int restarts, int max_iterations) {
  if (k < 2 || k > points.rows()) {
    throw InvalidArgument("kmeans: k=" + std::to_string(k) + " invalid for " +
                          std::to_string(points.rows()) + " points");
  }
  if (restarts < 1 || max_iterations < 1) {
    throw InvalidArgument("kmeans: restarts and iterations must be >= 1");
  }
  std::vector<LloydRun> runs(static_cast<std::size_t>(restarts));
  parallel_for(0, runs.size(), [&](std::size_t r) {
    Rng rng = make_stream(seed, StreamKind::kKMeans, {r});
    runs[r] = lloyd(points, k, rng, max_iterations);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].inertia < runs[best].inertia) best = r;
  }
  KMeansResult out;
  out.centers = std::move(runs[best].centers);
  out.assignment.assignment = std::move(runs[best].assignment);
  out.assignment.num_clusters = k;
  out.inertia = runs[best].inertia;
  out.iterations = runs[best].iterations;
  out.inertia_trace = std::move(runs[best].trace);
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["acc"] = acc;
  j["nmi"] = nmi;
  j["ari"] = ari;
  j["f1"] = f1;
  return j.dump();
}

std::string MetricsReport::to_table() const {
  return fmt::format("metric  value\nACC     {:.4f}\nNMI     {:.4f}\nARI     {:.4f}\nF1      {:.4f}\n",
                     acc, nmi, ari, f1);
}

std::vector<int> optimal_label_mapping(const Partition& pred,
                                       const Partition& truth) {
  const Contingency c = contingency(pred, truth);
  const auto compact_map = compact_mapping(c);
  // Translate compacted ids back to the original labels.
  std::vector<int> pred_ids, true_ids;
  {
    std::vector<char> seen(static_cast<std::size_t>(pred.num_clusters), 0);
    for (int l : pred.assignment) seen[l] = 1;
    for (int l = 0; l < pred.num_clusters; ++l) if (seen[l]) pred_ids.push_back(l);
  }
  {
    std::vector<char> seen(static_cast<std::size_t>(truth.num_clusters), 0);
    for (int l : truth.assignment) seen[l] = 1;
    for (int l = 0; l < truth.num_clusters; ++l) if (seen[l]) true_ids.push_back(l);
  }
  std::vector<int> mapping(static_cast<std::size_t>(pred.num_clusters), -1);
  for (std::size_t p = 0; p < compact_map.size(); ++p) {
    if (compact_map[p] >= 0) mapping[pred_ids[p]] = true_ids[compact_map[p]];
  }
  return mapping;
}

double accuracy(const Partition& pred, const Partition& truth) {
  const Contingency c = contingency(pred, truth);
  const auto mapping = compact_mapping(c);
  std::int64_t hits = 0;
  for (std::size_t p = 0; p < mapping.size(); ++p) {
    if (mapping[p] >= 0) hits += c.table[p][mapping[p]];
  }
  return static_cast<double>(hits) / static_cast<double>(c.n);
}

double nmi(const Partition& pred, const Partition& truth) {
  const Contingency c = contingency(pred, truth);
  const double n = static_cast<double>(c.n);
  const double hp = entropy(c.pred_sizes, c.n);
  const double ht = entropy(c.true_sizes, c.n);
  if (hp == 0.0 && ht == 0.0) return 1.0;
  double mi = 0.0;
  for (std::size_t p = 0; p < c.table.size(); ++p) {
    for (std::size_t t = 0; t < c.table[p].size(); ++t) {
      const auto nij = c.table[p][t];
      if (nij == 0) continue;
      mi += (nij / n) * std::log(nij * n / (static_cast<double>(c.pred_sizes[p]) *
                                            static_cast<double>(c.true_sizes[t])));
    }
  }
  const double denom = 0.5 * (hp + ht);
  return std::clamp(mi / denom, 0.0, 1.0);
}

double ari(const Partition& pred, const Partition& truth) {
  const Contingency c = contingency(pred, truth);
  double index = 0.0;
  for (const auto& row : c.table) {
    for (auto nij : row) index += choose2(nij);
  }
  double a = 0.0, b = 0.0;
  for (auto s : c.pred_sizes) a += choose2(s);
  for (auto s : c.true_sizes) b += choose2(s);
  const double pairs = choose2(c.n);
  const double expected = pairs > 0.0 ? a * b / pairs : 0.0;
  const double max_index = 0.5 * (a + b);
  if (max_index == expected) return index == expected ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

double macro_f1(const Partition& pred, const Partition& truth) {
  const Contingency c = contingency(pred, truth);
  const auto mapping = compact_mapping(c);
  const int kt = static_cast<int>(c.true_sizes.size());
  std::vector<double> f1(kt, 0.0);
  int unmatched_pred = 0;
  for (std::size_t p = 0; p < mapping.size(); ++p) {
    const int t = mapping[p];
    if (t < 0) {
      ++unmatched_pred;
      continue;
    }
    const double tp = static_cast<double>(c.table[p][t]);
    if (tp == 0.0) continue;
    const double precision = tp / static_cast<double>(c.pred_sizes[p]);
    const double recall = tp / static_cast<double>(c.true_sizes[t]);
    f1[t] = 2.0 * precision * recall / (precision + recall);
  }
  double sum = 0.0;
  for (double x : f1) sum += x;
  return sum / static_cast<double>(kt + unmatched_pred);
}

MetricsReport evaluate(const Partition& pred, const Partition& truth) {
  return {accuracy(pred, truth), nmi(pred, truth), ari(pred, truth),
          macro_f1(pred, truth)};
}

PurityReport pseudo_label_purity(const PairSets& pairs,
                                 std::span<const NodeId> members,
                                 const Partition& labels) {
  if (static_cast<std::size_t>(pairs.size()) != members.size()) {
    throw InvalidArgument("pseudo_label_purity: pairs and members differ in size");
  }
  PurityReport r;
  std::int64_t pos_same = 0, neg_diff = 0;
  for (NodeId v = 0; v < pairs.size(); ++v) {
    const NodeId gv = members[v];
    if (gv < 0 || gv >= labels.size()) {
      throw InvalidArgument("pseudo_label_purity: member without a label");
    }
    const int lv = labels.assignment[gv];
    for (NodeId u : pairs.positives[v]) {
      ++r.positive_pairs;
      pos_same += labels.assignment[members[u]] == lv ? 1 : 0;
    }
    for (NodeId u : pairs.negatives[v]) {
      ++r.negative_pairs;
      neg_diff += labels.assignment[members[u]] != lv ? 1 : 0;
    }
  }
  if (r.positive_pairs > 0) r.positive = static_cast<double>(pos_same) / r.positive_pairs;
  if (r.negative_pairs > 0) r.negative = static_cast<double>(neg_diff) / r.negative_pairs;
  return r;
}

}  // namespace magi
