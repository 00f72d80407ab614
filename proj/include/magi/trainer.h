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

#ifndef MAGI_TRAINER_H_
#define MAGI_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "magi/checkpoint.h"
#include "magi/encoder.h"
#include "magi/graph.h"
#include "magi/loss.h"
#include "magi/walk.h"

namespace magi {

struct TrainConfig {
  int epochs = 400;
  WalkConfig walk;
  Arch arch = Arch::kGcn;
  int num_layers = 1;
  int embedding_dim = 512;  // every layer outputs this width
  double leaky_slope = 0.5;
  bool activate_output = true;
  double tau = 0.3;
  OptimizerConfig optimizer;
  LossKind loss = LossKind::kSimclr;
  PairRule pairs = PairRule::kMagi;
  bool per_pair_denominator = false;
  int high_order = 0;  // order for the hms rule; 0 means walk.depth
  std::uint64_t seed = 0;
  // Graphs with at most this many nodes use every node as a root.
  NodeId full_batch_threshold = 20000;
  int batches_per_epoch = 1;
  NodeId dense_cap = kDefaultDenseCap;
  int checkpoint_every = 0;  // epochs; 0 disables periodic checkpoints
  std::filesystem::path checkpoint_dir;

  void validate() const;
  std::vector<int> layer_dims(int input_dim) const;

  // Stable "key = value" rendering, also stored inside checkpoints.
  std::string to_config_text() const;
};

std::map<std::string, std::string> parse_config_text(const std::string& text);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  NodeId batch_size = 0;
  double seconds = 0.0;
  std::int64_t positives = 0;
  bool skipped = false;
  // Bytes held by the dense per-batch structures of this epoch.
  std::int64_t batch_bytes = 0;
};

struct TrainTrace {
  std::vector<EpochRecord> records;

  // "epoch,loss,batch_size,seconds,positives" with a header line.
  std::string to_csv(bool header = true) const;
};

struct TrainResult {
  EncoderParams<Real> params;
  OptimizerState<Real> optimizer;
  TrainTrace trace;
  std::int64_t epochs_completed = 0;

  Checkpoint to_checkpoint(const TrainConfig& cfg) const;
};

struct TrainHooks {
  std::ostream* log = nullptr;
  std::function<void(const EpochRecord&)> on_epoch;
};

// Raised after three consecutive epochs without a usable batch.
class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TrainResult train(const CsrGraph& graph, const FeatureMatrix& features,
                  const TrainConfig& cfg, const TrainHooks& hooks = {});

// Continues from a checkpoint up to cfg.epochs total epochs. Structural
// mismatches (arch, dims, activation placement) throw InvalidArgument listing
// every differing field; other differing settings are logged as drift.
TrainResult resume(const Checkpoint& checkpoint, const CsrGraph& graph,
                   const FeatureMatrix& features, const TrainConfig& cfg,
                   const TrainHooks& hooks = {});
TrainResult resume(const std::filesystem::path& checkpoint_path,
                   const CsrGraph& graph, const FeatureMatrix& features,
                   const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace magi

#endif  // MAGI_TRAINER_H_
