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

// Independent reference implementations. Everything here is deliberately
// naive (dense, brute force, long double) and shares no code paths with the
// library beyond the public data types.

#ifndef MAGI_TESTS_ORACLE_ORACLE_H_
#define MAGI_TESTS_ORACLE_ORACLE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "magi/dense.h"
#include "magi/encoder.h"
#include "magi/graph.h"
#include "magi/loss.h"
#include "magi/modularity.h"
#include "magi/partition.h"

namespace magi::oracle {

Matrix<double> dense_adjacency(const CsrGraph& graph);

// Double sum over all ordered node pairs.
double brute_modularity(const CsrGraph& graph, const Partition& partition);

// (1/2m) tr(P^T B P) with an explicit one-hot P.
double trace_modularity(const DenseModularityMatrix& b, const Partition& partition,
                        double two_m);

// Limit of the in-batch similarity as the walk count grows: rows of
// sum_{k=1..depth} P^k restricted to members and renormalized, P = D^-1 A.
Matrix<double> walk_similarity_limit(const CsrGraph& graph,
                                     std::span<const NodeId> members, int depth);

// D^-1/2 (A + I) D^-1/2 X W.
Matrix<double> gcn_preactivation(const CsrGraph& graph, const Matrix<double>& x,
                                 const Matrix<double>& w);

double simclr_naive(const Matrix<double>& z, const PairSets& pairs, double tau,
                    bool per_pair_denominator);
double simple_naive(const Matrix<double>& z, const PairSets& pairs);

// Brute force over every injective cluster-to-class assignment.
double accuracy_brute(const Partition& pred, const Partition& truth);
double nmi_direct(const Partition& pred, const Partition& truth);
// Pair counting over all N(N-1)/2 node pairs.
double ari_pairs(const Partition& pred, const Partition& truth);
// Macro F1 under the assignment maximizing agreement, ties broken by the
// larger summed F1.
double f1_brute(const Partition& pred, const Partition& truth);

struct GradCheck {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::int64_t num_params = 0;
};

struct GradCheckInput {
  CsrGraph graph;
  Matrix<double> features;
  EncoderParams<double> params;
  PairSets pairs;
};

// Random instance whose pre-activations all stay at least `margin` from the
// LeakyReLU kink: draws are repeated until that holds.
GradCheckInput random_grad_instance(Arch arch, std::vector<int> dims, NodeId nodes,
                                    std::uint64_t seed, double margin = 1e-3);

// Central differences of the encoder+loss composite against the analytic
// backward. `perturb` scales the analytic gradient by (1 + perturb) to prove
// the harness can fail. Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradCheck finite_difference_check(const GradCheckInput& in, LossKind loss,
                                  double tau, bool per_pair_denominator,
                                  double eps = 1e-5, double perturb = 0.0);

struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  double gradient_perturbation = 0.0;
};

// The derived-example suite behind the `oracle` command.
std::vector<CheckResult> run_suite(const SuiteOptions& options);

}  // namespace magi::oracle

#endif  // MAGI_TESTS_ORACLE_ORACLE_H_
