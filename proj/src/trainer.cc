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

#include "magi/trainer.h"

#include <algorithm>
#include <chrono>
#include <iterator>
#include <optional>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "magi/rng.h"

namespace magi {

namespace {

constexpr int kMaxConsecutiveSkips = 3;

// Keys that change the shape of the parameters; these must match on resume.
const char* const kStructuralKeys[] = {"arch", "layers", "dim", "activate-output"};

std::string bool_text(bool b) { return b ? "true" : "false"; }

class Runner {
 public:
  Runner(const CsrGraph& graph, const FeatureMatrix& features,
         const TrainConfig& cfg, const TrainHooks& hooks)
      : graph_(graph), features_(features), cfg_(cfg), hooks_(hooks) {
    cfg_.validate();
    if (features.num_rows() != graph.num_nodes()) {
      throw InvalidArgument("features have " + std::to_string(features.num_rows()) +
                            " rows for a graph with " +
                            std::to_string(graph.num_nodes()) + " nodes");
    }
    walk_ = cfg_.walk;
    walk_.seed = cfg_.seed;
    for (NodeId v = 0; v < graph.num_nodes(); ++v) {
      if (graph.degree(v) > 0) candidates_.push_back(v);
    }
    if (candidates_.empty()) throw InvalidArgument("graph has no edges to train on");
    if (cfg_.pairs == PairRule::kHighOrder) {
      const int order = cfg_.high_order > 0 ? cfg_.high_order : cfg_.walk.depth;
      high_order_ = high_order_modularity_matrix(graph, order, cfg_.dense_cap);
    }
  }

  void run(TrainResult& state) {
    int consecutive_skips = 0;
    while (state.epochs_completed < cfg_.epochs) {
      const int epoch = static_cast<int>(state.epochs_completed);
      EpochRecord rec = run_epoch(state, epoch);
      state.trace.records.push_back(rec);
      ++state.epochs_completed;
      if (hooks_.on_epoch) hooks_.on_epoch(rec);
      if (rec.skipped) {
        warn(fmt::format("epoch {} skipped: no active anchors in any batch", rec.epoch));
        if (++consecutive_skips >= kMaxConsecutiveSkips) {
          throw TrainingAborted(fmt::format(
              "aborting after {} consecutive degenerate epochs (last batch size {}); "
              "the graph may be too sparse for walks of depth {}",
              consecutive_skips, rec.batch_size, cfg_.walk.depth));
        }
      } else {
        consecutive_skips = 0;
      }
      if (cfg_.checkpoint_every > 0 && !cfg_.checkpoint_dir.empty() &&
          state.epochs_completed % cfg_.checkpoint_every == 0) {
        std::filesystem::create_directories(cfg_.checkpoint_dir);
        save_checkpoint(state.to_checkpoint(cfg_),
                        cfg_.checkpoint_dir /
                            fmt::format("epoch_{:05d}.ckpt", state.epochs_completed));
      }
    }
  }

  void warn(const std::string& msg) const {
    if (hooks_.log) *hooks_.log << "[warn] " << msg << '\n';
  }

 private:
  std::vector<NodeId> sample_roots(std::uint64_t key) const {
    if (graph_.num_nodes() <= cfg_.full_batch_threshold) return candidates_;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(cfg_.walk.num_roots),
                                         candidates_.size());
    // Floyd's subset sampling: O(n) expected work however large the graph is.
    Rng rng = make_stream(cfg_.seed, StreamKind::kRootSampling, {key});
    const std::size_t total = candidates_.size();
    std::unordered_set<std::size_t> picked;
    picked.reserve(n);
    for (std::size_t j = total - n; j < total; ++j) {
      const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
      picked.insert(picked.contains(t) ? j : t);
    }
    std::vector<std::size_t> order(picked.begin(), picked.end());
    std::sort(order.begin(), order.end());
    std::vector<NodeId> roots;
    roots.reserve(n);
    for (std::size_t i : order) roots.push_back(candidates_[i]);
    return roots;
  }

  PairSets make_pairs(const std::vector<NodeId>& members, std::uint64_t key,
                      std::int64_t& bytes) const {
    switch (cfg_.pairs) {
      case PairRule::kMagi: {
        const Batch batch = batch_similarity(graph_, members, walk_, key);
        bytes += static_cast<std::int64_t>(batch.similarity.size() +
                                           batch.modularity.size()) *
                 static_cast<std::int64_t>(sizeof(double));
        return derive_pairs(batch);
      }
      case PairRule::kModularity:
        return derive_pairs_modularity_sign(graph_, members);
      case PairRule::kEdgeIndicator:
        return derive_pairs_edge_indicator(graph_, members);
      case PairRule::kHighOrder:
        return derive_pairs_high_order(*high_order_, members);
    }
    throw InvalidArgument("unhandled pair rule");
  }

  EpochRecord run_epoch(TrainResult& state, int epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.skipped = true;
    double loss_sum = 0.0;
    int steps = 0;
    for (int b = 0; b < cfg_.batches_per_epoch; ++b) {
      const auto key = static_cast<std::uint64_t>(epoch) * cfg_.batches_per_epoch + b;
      const std::vector<NodeId> roots = sample_roots(key);
      const std::vector<NodeId> members = build_batch(graph_, roots, walk_, key);
      rec.batch_size = std::max(rec.batch_size, static_cast<NodeId>(members.size()));
      if (members.size() < 2) continue;

      std::int64_t bytes = 0;
      const PairSets pairs = make_pairs(members, key, bytes);
      if (pairs.num_active() == 0) continue;
      rec.positives += pairs.num_positive_pairs();

      const InducedSubgraph sub = induce_subgraph(graph_, members);
      const Matrix<Real> x = gather_rows(features_, members);
      ForwardWorkspace<Real> ws;
      const Matrix<Real> z = encoder_forward(sub.local, x, state.params, &ws);
      const LossResult<Real> loss =
          cfg_.loss == LossKind::kSimclr
              ? simclr_loss(z, pairs, cfg_.tau, cfg_.per_pair_denominator)
              : simple_loss(z, pairs);
      const EncoderGradients<Real> grads = encoder_backward(ws, state.params, loss.grad);
      optimizer_step(state.params, grads, state.optimizer);

      const auto b2 = static_cast<std::int64_t>(members.size()) *
                      static_cast<std::int64_t>(members.size());
      std::int64_t width = 0;
      for (int d : state.params.dims) width += d;
      // logits + pair gradient, plus per-layer activations.
      bytes += 2 * b2 * static_cast<std::int64_t>(sizeof(Real)) +
               3 * static_cast<std::int64_t>(members.size()) * width *
                   static_cast<std::int64_t>(sizeof(Real));
      rec.batch_bytes = std::max(rec.batch_bytes, bytes);
      loss_sum += loss.report.value;
      ++steps;
      rec.skipped = false;
    }
    rec.loss = steps > 0 ? loss_sum / steps : 0.0;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
  }

  const CsrGraph& graph_;
  const FeatureMatrix& features_;
  const TrainConfig& cfg_;
  const TrainHooks& hooks_;
  WalkConfig walk_;
  std::vector<NodeId> candidates_;
  std::optional<DenseModularityMatrix> high_order_;
};

}  // namespace

void TrainConfig::validate() const {
  walk.validate();
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (num_layers < 1) throw InvalidArgument("layers must be >= 1");
  if (embedding_dim < 1) throw InvalidArgument("dim must be >= 1");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be > 0");
  if (!(optimizer.learning_rate > 0.0)) throw InvalidArgument("lr must be > 0");
  if (optimizer.weight_decay < 0.0) throw InvalidArgument("wd must be >= 0");
  if (leaky_slope < 0.0) throw InvalidArgument("alpha must be >= 0");
  if (batches_per_epoch < 1) throw InvalidArgument("batches per epoch must be >= 1");
  if (high_order < 0) throw InvalidArgument("high order must be >= 0");
  if (checkpoint_every < 0) throw InvalidArgument("checkpoint cadence must be >= 0");
}

std::vector<int> TrainConfig::layer_dims(int input_dim) const {
  std::vector<int> dims{input_dim};
  for (int l = 0; l < num_layers; ++l) dims.push_back(embedding_dim);
  return dims;
}

std::string TrainConfig::to_config_text() const {
  std::ostringstream out;
  out << "epochs = " << epochs << '\n'
      << "walks = " << walk.num_walks << '\n'
      << "depth = " << walk.depth << '\n'
      << "roots = " << walk.num_roots << '\n'
      << "full-config-model = " << bool_text(walk.full_config_model) << '\n'
      << "arch = " << to_string(arch) << '\n'
      << "layers = " << num_layers << '\n'
      << "dim = " << embedding_dim << '\n'
      << "alpha = " << fmt::format("{}", leaky_slope) << '\n'
      << "activate-output = " << bool_text(activate_output) << '\n'
      << "tau = " << fmt::format("{}", tau) << '\n'
      << "lr = " << fmt::format("{}", optimizer.learning_rate) << '\n'
      << "wd = " << fmt::format("{}", optimizer.weight_decay) << '\n'
      << "loss = " << to_string(loss) << '\n'
      << "pairs = " << to_string(pairs) << '\n'
      << "per-pair-denominator = " << bool_text(per_pair_denominator) << '\n'
      << "high-order = " << high_order << '\n'
      << "seed = " << seed << '\n'
      << "full-batch-threshold = " << full_batch_threshold << '\n'
      << "batches-per-epoch = " << batches_per_epoch << '\n'
      << "dense-cap = " << dense_cap << '\n';
  return out.str();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::string TrainTrace::to_csv(bool header) const {
  std::ostringstream out;
  if (header) out << "epoch,loss,batch_size,seconds,positives\n";
  for (const auto& r : records) {
    out << r.epoch << ',' << fmt::format("{:.9g}", r.loss) << ',' << r.batch_size
        << ',' << fmt::format("{:.6f}", r.seconds) << ',' << r.positives << '\n';
  }
  return out.str();
}

Checkpoint TrainResult::to_checkpoint(const TrainConfig& cfg) const {
  Checkpoint c;
  c.params = params;
  c.epochs_completed = epochs_completed;
  c.config_text = cfg.to_config_text();
  c.optimizer = optimizer;
  return c;
}

TrainResult train(const CsrGraph& graph, const FeatureMatrix& features,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
  Runner runner(graph, features, cfg, hooks);
  TrainResult state;
  state.params = EncoderParams<Real>::init(cfg.arch, cfg.layer_dims(features.dim()),
                                           static_cast<Real>(cfg.leaky_slope),
                                           cfg.activate_output, cfg.seed);
  state.optimizer = OptimizerState<Real>::init(state.params, cfg.optimizer);
  runner.run(state);
  return state;
}

TrainResult resume(const Checkpoint& checkpoint, const CsrGraph& graph,
                   const FeatureMatrix& features, const TrainConfig& cfg,
                   const TrainHooks& hooks) {
  const auto& p = checkpoint.params;
  std::vector<std::string> diffs;
  if (p.arch != cfg.arch) {
    diffs.push_back("arch (checkpoint " + to_string(p.arch) + ", config " +
                    to_string(cfg.arch) + ")");
  }
  const auto want = cfg.layer_dims(features.dim());
  if (p.dims != want) {
    auto render = [](const std::vector<int>& d) {
      return fmt::format("{}", fmt::join(d, "x"));
    };
    diffs.push_back("dims (checkpoint " + render(p.dims) + ", config " +
                    render(want) + ")");
  }
  if (p.activate_output != cfg.activate_output) diffs.push_back("activate-output");
  if (!diffs.empty()) {
    throw InvalidArgument(fmt::format("checkpoint does not match config: {}",
                                      fmt::join(diffs, "; ")));
  }

  Runner runner(graph, features, cfg, hooks);
  const auto before = parse_config_text(checkpoint.config_text);
  const auto after = parse_config_text(cfg.to_config_text());
  for (const auto& [key, value] : after) {
    if (std::find(std::begin(kStructuralKeys), std::end(kStructuralKeys), key) !=
        std::end(kStructuralKeys)) {
      continue;
    }
    auto it = before.find(key);
    if (it != before.end() && it->second != value && hooks.log) {
      *hooks.log << "[drift] " << key << ": " << it->second << " -> " << value << '\n';
    }
  }
  if (static_cast<Real>(cfg.leaky_slope) != p.leaky_slope && hooks.log) {
    *hooks.log << "[drift] alpha taken from config\n";
  }

  TrainResult state;
  state.params = p;
  state.params.leaky_slope = static_cast<Real>(cfg.leaky_slope);
  state.epochs_completed = checkpoint.epochs_completed;
  if (checkpoint.optimizer) {
    state.optimizer = *checkpoint.optimizer;
    state.optimizer.config = cfg.optimizer;
  } else {
    runner.warn("checkpoint has no optimizer state; moments restart from zero");
    state.optimizer = OptimizerState<Real>::init(state.params, cfg.optimizer);
  }
  runner.run(state);
  return state;
}

TrainResult resume(const std::filesystem::path& checkpoint_path,
                   const CsrGraph& graph, const FeatureMatrix& features,
                   const TrainConfig& cfg, const TrainHooks& hooks) {
  return resume(load_checkpoint(checkpoint_path), graph, features, cfg, hooks);
}

}  // namespace magi
