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

#include <cmath>
#include <numeric>
#include <random>

#include "magi/metrics.h"
#include "oracle.h"

namespace magi {
namespace {

Partition labels_of(std::vector<int> v) { return Partition::from_labels(std::move(v)); }

Partition random_labels(int n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> v(n);
  for (int& x : v) x = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
  return labels_of(v);
}

Partition balanced(int n, int k) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i % k;
  return labels_of(v);
}

Partition permuted(const Partition& p, std::uint64_t seed) {
  std::vector<int> perm(p.num_clusters);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
  std::vector<int> out;
  for (int a : p.assignment) out.push_back(perm[a]);
  return labels_of(out);
}

Matrix<double> blobs(int per_blob, int k, double spread, std::uint64_t seed,
                     std::vector<int>* truth) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  Matrix<double> pts(per_blob * k, 3);
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < per_blob; ++i) {
      const int r = c * per_blob + i;
      for (int d = 0; d < 3; ++d) pts(r, d) = 10.0 * (d == c % 3) + 10.0 * (c / 3) + g(rng);
      truth->push_back(c);
    }
  }
  return pts;
}

TEST_CASE("kmeans recovers well-separated blobs") {
  std::vector<int> truth;
  const Matrix<double> pts = blobs(30, 4, 0.3, 1, &truth);
  const KMeansResult r = kmeans(pts, 4, 7);
  CHECK(accuracy(r.assignment, labels_of(truth)) == 1.0);
  CHECK(r.assignment.size() == 120);
  double inertia = 0.0;
  for (int i = 0; i < 120; ++i) {
    inertia += (pts.row(i) - r.centers.row(r.assignment.assignment[i])).squaredNorm();
  }
  CHECK(r.inertia == doctest::Approx(inertia).epsilon(1e-12));
}

TEST_CASE("kmeans with k equal to the point count has zero inertia") {
  std::vector<int> truth;
  const Matrix<double> pts = blobs(2, 3, 1.0, 2, &truth);
  CHECK(kmeans(pts, 6, 1).inertia == doctest::Approx(0.0));
}

TEST_CASE("kmeans inertia never increases across Lloyd iterations") {
  std::vector<int> truth;
  const Matrix<double> pts = blobs(40, 5, 3.0, 3, &truth);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const KMeansResult r = kmeans(pts, 5, seed, 1);
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
      CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] + 1e-9);
    }
  }
}

TEST_CASE("kmeans is deterministic and validates k") {
  std::vector<int> truth;
  const Matrix<double> pts = blobs(20, 3, 2.0, 4, &truth);
  const KMeansResult a = kmeans(pts, 3, 9, 4), b = kmeans(pts, 3, 9, 4);
  CHECK(a.assignment.assignment == b.assignment.assignment);
  CHECK(a.inertia == b.inertia);
  CHECK_THROWS_AS(kmeans(pts, 1, 0), InvalidArgument);
  CHECK_THROWS_AS(kmeans(pts, 61, 0), InvalidArgument);
}

TEST_CASE("kmeans copes with duplicate points") {
  Matrix<double> pts = Matrix<double>::Zero(10, 2);
  pts.bottomRows(3).setOnes();
  const KMeansResult r = kmeans(pts, 3, 1);
  CHECK(r.assignment.num_clusters <= 3);
  CHECK(std::isfinite(r.inertia));
}

TEST_CASE("identical and permuted partitions score 1") {
  const Partition t = random_labels(50, 5, 1);
  for (const Partition& p : {t, permuted(t, 3)}) {
    const MetricsReport m = evaluate(p, t);
    CHECK(m.acc == 1.0);
    CHECK(m.nmi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.ari == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.f1 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("one cluster against a balanced truth") {
  const Partition t = balanced(20, 2);
  const Partition one = labels_of(std::vector<int>(20, 0));
  CHECK(nmi(one, t) == doctest::Approx(0.0));
  CHECK(ari(one, t) == doctest::Approx(0.0));
  CHECK(accuracy(one, t) == 0.5);
}

TEST_CASE("hand-computed contingency [[5,0],[1,4]]") {
  const Partition p = labels_of({0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  const Partition t = labels_of({0, 0, 0, 0, 0, 0, 1, 1, 1, 1});
  CHECK(accuracy(p, t) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(std::abs(ari(p, t) - 40.0 / 67.0) < 1e-12);
  const double mi = 0.5 * std::log(5.0 / 3.0) + 0.1 * std::log(1.0 / 3.0) + 0.4 * std::log(2.0);
  const double hp = std::log(2.0);
  const double ht = -(0.6 * std::log(0.6) + 0.4 * std::log(0.4));
  CHECK(std::abs(nmi(p, t) - mi / ((hp + ht) / 2)) < 1e-12);
  CHECK(std::abs(macro_f1(p, t) - (10.0 / 11.0 + 8.0 / 9.0) / 2) < 1e-12);
  CHECK(optimal_label_mapping(p, t) == std::vector<int>{0, 1});
}

TEST_CASE("extra predicted clusters count as zero-F1 classes") {
  const Partition t = labels_of({0, 0, 1, 1});
  const Partition p = labels_of({0, 0, 1, 2});
  // Class 0: F1 1; class 1 matched to cluster 1: P=1, R=1/2, F1=2/3; cluster 2 unmatched.
  CHECK(macro_f1(p, t) == doctest::Approx((1.0 + 2.0 / 3.0) / 3.0).epsilon(1e-12));
  CHECK(optimal_label_mapping(p, t)[2] == -1);
}

TEST_CASE("property: metrics agree with brute force") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Partition p = random_labels(15, 2 + static_cast<int>(seed % 4), seed);
    const Partition t = random_labels(15, 2 + static_cast<int>((seed / 4) % 4), seed + 1000);
    CHECK(std::abs(accuracy(p, t) - oracle::accuracy_brute(p, t)) < 1e-12);
    CHECK(std::abs(nmi(p, t) - oracle::nmi_direct(p, t)) < 1e-12);
    CHECK(std::abs(ari(p, t) - oracle::ari_pairs(p, t)) < 1e-12);
    CHECK(std::abs(macro_f1(p, t) - oracle::f1_brute(p, t)) < 1e-12);
  }
}

TEST_CASE("property: invariances, symmetry and ranges") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Partition t = balanced(60, 4);
    const Partition p = random_labels(60, 4, seed);
    const Partition q = permuted(p, seed + 1);
    const MetricsReport a = evaluate(p, t), b = evaluate(q, t);
    CHECK(a.acc == b.acc);
    CHECK(std::abs(a.nmi - b.nmi) < 1e-12);
    CHECK(std::abs(a.ari - b.ari) < 1e-12);
    CHECK(std::abs(a.f1 - b.f1) < 1e-12);
    CHECK(a.acc >= 0.25);
    CHECK(std::abs(nmi(p, t) - nmi(t, p)) < 1e-12);
    CHECK(std::abs(ari(p, t) - ari(t, p)) < 1e-12);
    CHECK(a.nmi >= 0.0);
    CHECK(a.nmi <= 1.0 + 1e-12);
    CHECK(a.ari >= -1.0);
    CHECK(a.ari <= 1.0);
    CHECK(a.f1 >= 0.0);
    CHECK(a.f1 <= 1.0);
  }
}

TEST_CASE("size mismatch is an error") {
  CHECK_THROWS_AS(accuracy(labels_of({0, 1}), labels_of({0, 1, 1})), InvalidArgument);
  CHECK_THROWS_AS(nmi(labels_of({0, 1}), labels_of({0})), InvalidArgument);
}

TEST_CASE("report formats") {
  const MetricsReport m{1.0, 0.5, 0.25, 0.125};
  CHECK(m.to_json() == R"({"acc":1.0,"nmi":0.5,"ari":0.25,"f1":0.125})");
  CHECK(m.to_table().find("NMI     0.5000") != std::string::npos);
}

TEST_CASE("pseudo-label purity") {
  const Partition labels = labels_of({0, 0, 0, 1, 1, 1});
  PairSets pairs;
  pairs.positives = {{1, 2}, {0}, {}, {}, {}, {}};
  pairs.negatives = {{3, 4, 5}, {2, 3, 4, 5}, {}, {}, {}, {}};
  const std::vector<NodeId> members = {0, 1, 2, 3, 4, 5};
  const PurityReport r = pseudo_label_purity(pairs, members, labels);
  CHECK(r.positive == 1.0);
  CHECK(r.positive_pairs == 3);
  CHECK(r.negative == doctest::Approx(6.0 / 7.0));
  CHECK(r.negative_pairs == 7);
}

TEST_CASE("random pairs on balanced classes have purity near 1/k") {
  const int n = 400, k = 4;
  const Partition labels = balanced(n, k);
  std::mt19937_64 rng(5);
  PairSets pairs;
  pairs.positives.assign(n, {});
  pairs.negatives.assign(n, {});
  for (NodeId v = 0; v < n; ++v) {
    for (int i = 0; i < 10; ++i) {
      NodeId u = static_cast<NodeId>(rng() % n);
      if (u != v) pairs.positives[v].push_back(u);
    }
  }
  std::vector<NodeId> members(n);
  std::iota(members.begin(), members.end(), 0);
  const PurityReport r = pseudo_label_purity(pairs, members, labels);
  // Same-label chance given u != v is (n/k - 1)/(n - 1).
  const double p = (n / k - 1.0) / (n - 1.0);
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(r.positive_pairs));
  CHECK(std::abs(r.positive - p) < 3 * sigma);
}

}  // namespace
}  // namespace magi
