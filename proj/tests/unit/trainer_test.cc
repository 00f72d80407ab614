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

#include <fstream>
#include <sstream>

#include "magi/checkpoint.h"
#include "magi/synthetic.h"
#include "magi/trainer.h"
#include "test_util.h"

namespace magi {
namespace {

using testing::TempDir;

struct TwoCliques {
  PlantedGraph planted = disjoint_cliques(2, 10);
  FeatureMatrix features = block_features(planted.labels, 16, 1.0, 3);
};

TrainConfig small_config(int epochs, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.embedding_dim = 32;
  cfg.seed = seed;
  cfg.walk.num_walks = 20;
  cfg.optimizer.learning_rate = 1e-2;
  return cfg;
}

double mean_cosine(const Matrix<Real>& z, const Partition& labels, bool same) {
  double sum = 0;
  int count = 0;
  for (NodeId i = 0; i < labels.size(); ++i) {
    for (NodeId j = i + 1; j < labels.size(); ++j) {
      if ((labels.assignment[i] == labels.assignment[j]) != same) continue;
      sum += z.row(i).dot(z.row(j));
      ++count;
    }
  }
  return sum / count;
}

bool same_params(const EncoderParams<Real>& a, const EncoderParams<Real>& b) {
  if (a.dims != b.dims || a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].w != b.layers[l].w || a.layers[l].w_neigh != b.layers[l].w_neigh) {
      return false;
    }
  }
  return true;
}

TEST_CASE("two cliques: loss falls and cliques separate") {
  TwoCliques data;
  TrainConfig cfg;
  cfg.epochs = 100;
  const TrainResult r = train(data.planted.graph, data.features, cfg);
  REQUIRE(r.trace.records.size() == 100);
  CHECK(r.trace.records.back().loss < r.trace.records.front().loss);
  const Matrix<Real> z = full_graph_embed(data.planted.graph, data.features, r.params);
  CHECK(mean_cosine(z, data.planted.labels, true) > mean_cosine(z, data.planted.labels, false));
  CHECK(r.epochs_completed == 100);
  CHECK(r.optimizer.step == 100);
}

TEST_CASE("property: loss decreases over training for most seeds") {
  TwoCliques data;
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.seed = seed;
    const TrainResult r = train(data.planted.graph, data.features, cfg);
    decreased += r.trace.records.back().loss < r.trace.records.front().loss;
  }
  CHECK(decreased >= 19);  // >= 95% of 20 seeds
}

TEST_CASE("identical seeds give identical traces and weights") {
  TwoCliques data;
  for (PairRule rule : {PairRule::kMagi, PairRule::kEdgeIndicator}) {
    TrainConfig cfg = small_config(15, 4);
    cfg.pairs = rule;
    const TrainResult a = train(data.planted.graph, data.features, cfg);
    const TrainResult b = train(data.planted.graph, data.features, cfg);
    CHECK(same_params(a.params, b.params));
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
      CHECK(a.trace.records[i].loss == b.trace.records[i].loss);
      CHECK(a.trace.records[i].batch_size == b.trace.records[i].batch_size);
      CHECK(a.trace.records[i].positives == b.trace.records[i].positives);
    }
  }
}

TEST_CASE("every pair rule and loss trains") {
  const PlantedGraph sbm = stochastic_block_model({20, 20}, 0.3, 0.03, 1);
  const FeatureMatrix f = block_features(sbm.labels, 8, 1.0, 1);
  for (PairRule rule : {PairRule::kMagi, PairRule::kModularity, PairRule::kEdgeIndicator,
                        PairRule::kHighOrder}) {
    for (LossKind loss : {LossKind::kSimclr, LossKind::kSimple}) {
      TrainConfig cfg = small_config(5, 2);
      cfg.pairs = rule;
      cfg.loss = loss;
      cfg.arch = rule == PairRule::kModularity ? Arch::kSage : Arch::kGcn;
      const TrainResult r = train(sbm.graph, f, cfg);
      CHECK(r.trace.records.size() == 5);
      for (const auto& rec : r.trace.records) CHECK(std::isfinite(rec.loss));
    }
  }
}

TEST_CASE("sampled roots on a large graph keep batches bounded") {
  const PlantedGraph sbm = stochastic_block_model({300, 300}, 0.03, 0.002, 5);
  const FeatureMatrix f = block_features(sbm.labels, 8, 1.0, 1);
  TrainConfig cfg = small_config(3, 1);
  cfg.full_batch_threshold = 100;
  cfg.walk.num_roots = 20;
  cfg.batches_per_epoch = 2;
  const TrainResult r = train(sbm.graph, f, cfg);
  CHECK(r.optimizer.step == 6);
  for (const auto& rec : r.trace.records) {
    CHECK(rec.batch_size > 20);
    CHECK(rec.batch_size < 300);
    CHECK(rec.batch_bytes > 0);
  }
}

TEST_CASE("degenerate epochs are skipped, three in a row abort") {
  // A lone edge: S rows are uniform at depth 2, so no anchor has a positive.
  const std::vector<std::pair<NodeId, NodeId>> e = {{0, 1}};
  const CsrGraph g = CsrGraph::from_edges(2, e);
  const FeatureMatrix f = random_features(2, 4, 1);
  std::ostringstream log;
  TrainHooks hooks;
  hooks.log = &log;
  int seen = 0;
  hooks.on_epoch = [&](const EpochRecord& rec) {
    ++seen;
    CHECK(rec.skipped);
  };
  CHECK_THROWS_AS(train(g, f, small_config(10, 1), hooks), TrainingAborted);
  CHECK(seen == 3);
  CHECK(log.str().find("skipped") != std::string::npos);
}

TEST_CASE("config validation") {
  TwoCliques data;
  TrainConfig cfg = small_config(0, 1);
  CHECK_THROWS_AS(train(data.planted.graph, data.features, cfg), InvalidArgument);
  cfg = small_config(1, 1);
  cfg.tau = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = small_config(1, 1);
  CHECK_THROWS_AS(train(data.planted.graph, random_features(5, 16, 1), cfg), InvalidArgument);
  cfg.pairs = PairRule::kHighOrder;
  cfg.dense_cap = 10;
  CHECK_THROWS_AS(train(data.planted.graph, data.features, cfg), CapacityExceeded);
}

TEST_CASE("config text round trip") {
  TrainConfig cfg = small_config(7, 9);
  cfg.tau = 0.25;
  const auto kv = parse_config_text(cfg.to_config_text());
  CHECK(kv.at("epochs") == "7");
  CHECK(kv.at("tau") == "0.25");
  CHECK(kv.at("pairs") == "magi");
  CHECK(kv.at("seed") == "9");
}

TEST_CASE("trace CSV") {
  TrainTrace t;
  t.records.push_back({1, 2.5, 10, 0.25, 7, false, 0});
  const std::string csv = t.to_csv();
  CHECK(csv.rfind("epoch,loss,batch_size,seconds,positives\n1,2.5,10,0.250000,7\n", 0) == 0);
  CHECK(t.to_csv(false) == "1,2.5,10,0.250000,7\n");
}

TEST_CASE("checkpoint round trip is exact") {
  TempDir dir;
  TwoCliques data;
  for (Arch arch : {Arch::kGcn, Arch::kSage}) {
    TrainConfig cfg = small_config(3, 1);
    cfg.arch = arch;
    cfg.num_layers = 2;
    const TrainResult r = train(data.planted.graph, data.features, cfg);
    const auto path = dir.path() / "c.ckpt";
    save_checkpoint(r.to_checkpoint(cfg), path);
    const Checkpoint back = load_checkpoint(path);
    CHECK(same_params(back.params, r.params));
    CHECK(back.params.arch == arch);
    CHECK(back.params.leaky_slope == r.params.leaky_slope);
    CHECK(back.epochs_completed == 3);
    CHECK(back.config_text == cfg.to_config_text());
    REQUIRE(back.optimizer.has_value());
    CHECK(back.optimizer->step == r.optimizer.step);
    CHECK(back.optimizer->second_moment[1].w == r.optimizer.second_moment[1].w);
  }
}

TEST_CASE("corrupt checkpoints are refused") {
  TempDir dir;
  TwoCliques data;
  const TrainConfig cfg = small_config(1, 1);
  const TrainResult r = train(data.planted.graph, data.features, cfg);
  const auto path = dir.path() / "c.ckpt";
  save_checkpoint(r.to_checkpoint(cfg), path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream(path, std::ios::binary | std::ios::trunc) << b;
  };
  std::string bad = bytes;
  bad[0] = 'X';
  write(bad);
  CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  write(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  bad = bytes;
  bad[8] = 9;  // version
  write(bad);
  CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  bad = bytes;
  bad.back() = 'x';
  write(bad);
  CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "missing"), ParseError);
}

TEST_CASE("resume reproduces an uninterrupted run") {
  TempDir dir;
  TwoCliques data;
  const TrainConfig full = small_config(12, 5);
  const TrainResult straight = train(data.planted.graph, data.features, full);

  TrainConfig first = full;
  first.epochs = 5;
  first.checkpoint_every = 5;
  first.checkpoint_dir = dir.path();
  train(data.planted.graph, data.features, first);
  const auto ckpt = dir.path() / "epoch_00005.ckpt";
  REQUIRE(std::filesystem::exists(ckpt));
  const TrainResult resumed = resume(ckpt, data.planted.graph, data.features, full);
  CHECK(resumed.epochs_completed == 12);
  CHECK(resumed.trace.records.size() == 7);
  CHECK(resumed.trace.records.front().epoch == 6);
  CHECK(same_params(resumed.params, straight.params));
  CHECK(resumed.trace.records.back().loss == straight.trace.records.back().loss);
}

TEST_CASE("resume policy: drift is logged, structure must match") {
  TwoCliques data;
  const TrainConfig cfg = small_config(2, 1);
  const TrainResult r = train(data.planted.graph, data.features, cfg);
  const Checkpoint ckpt = r.to_checkpoint(cfg);

  TrainConfig hotter = cfg;
  hotter.epochs = 3;
  hotter.tau = 0.7;
  std::ostringstream log;
  TrainHooks hooks;
  hooks.log = &log;
  CHECK(resume(ckpt, data.planted.graph, data.features, hotter, hooks).epochs_completed == 3);
  CHECK(log.str().find("[drift] tau: 0.3 -> 0.7") != std::string::npos);

  TrainConfig other = cfg;
  other.arch = Arch::kSage;
  other.embedding_dim = 16;
  try {
    resume(ckpt, data.planted.graph, data.features, other);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("arch") != std::string::npos);
    CHECK(msg.find("dims") != std::string::npos);
  }
}

}  // namespace
}  // namespace magi
