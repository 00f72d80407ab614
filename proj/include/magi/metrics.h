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

#ifndef MAGI_METRICS_H_
#define MAGI_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "magi/dense.h"
#include "magi/loss.h"
#include "magi/partition.h"

namespace magi {

struct KMeansResult {
  Matrix<double> centers;  // k x d
  Partition assignment;
  double inertia = 0.0;
  int iterations = 0;
  // Inertia after every Lloyd iteration of the winning restart.
  std::vector<double> inertia_trace;
};

// Lloyd's algorithm with k-means++ seeding; the best of `restarts` seeded runs
// by inertia is returned (ties go to the lowest restart index). Empty
// clusters are refilled with the point farthest from its center.
KMeansResult kmeans(const Matrix<double>& points, int k, std::uint64_t seed,
                    int restarts = 10, int max_iterations = 300);

struct MetricsReport {
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  double f1 = 0.0;

  std::string to_json() const;
  std::string to_table() const;
};

// Cluster-to-class mapping that maximizes agreement, ties broken by summed
// F1. mapping[p] is the class matched to predicted cluster p, or -1 when p is
// unmatched.
std::vector<int> optimal_label_mapping(const Partition& pred,
                                       const Partition& truth);

double accuracy(const Partition& pred, const Partition& truth);
// Mutual information normalized by the arithmetic mean of the entropies.
double nmi(const Partition& pred, const Partition& truth);
double ari(const Partition& pred, const Partition& truth);
// Macro F1 over true classes after the optimal mapping; unmatched predicted
// clusters add zero-F1 terms.
double macro_f1(const Partition& pred, const Partition& truth);

MetricsReport evaluate(const Partition& pred, const Partition& truth);

struct PurityReport {
  double positive = 0.0;  // fraction of positive pairs sharing a label
  double negative = 0.0;  // fraction of negative pairs with differing labels
  std::int64_t positive_pairs = 0;
  std::int64_t negative_pairs = 0;
};

// Quality of pseudo-labels against ground truth; `members` maps local batch
// indices to node ids in `labels`.
PurityReport pseudo_label_purity(const PairSets& pairs,
                                 std::span<const NodeId> members,
                                 const Partition& labels);

}  // namespace magi

#endif  // MAGI_METRICS_H_
