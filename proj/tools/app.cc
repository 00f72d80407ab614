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

#include "app.h"

#include <algorithm>
#include <array>
#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "magi/checkpoint.h"
#include "magi/metrics.h"
#include "magi/modularity.h"
#include "magi/parallel.h"
#include "magi/trainer.h"
#include "oracle.h"

namespace magi::app {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::int64_t peak_rss_bytes() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream fields(line.substr(6));
      std::int64_t kb = 0;
      fields >> kb;
      return kb * 1024;
    }
  }
  return -1;
}

// Everything a command records about itself for the manifest.
struct Run {
  std::string command;
  std::vector<std::string> args;
  fs::path out_dir = "magi_out";
  std::string config_file;
  int threads = 0;
  Json inputs = Json::object();
  Json config = Json::object();
  Json artifacts = Json::object();
  std::optional<std::uint64_t> seed;
  std::int64_t max_batch_bytes = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void add_input(const std::string& name, const fs::path& path) {
    inputs[name] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
  }

  fs::path artifact(const std::string& name, const std::string& file) {
    fs::create_directories(out_dir);
    const fs::path p = out_dir / file;
    artifacts[name] = p.string();
    return p;
  }

  void write_manifest() {
    Json m;
    m["command"] = command;
    m["argv"] = args;
    if (!config_file.empty()) {
      m["config_file"] = {{"path", config_file}, {"sha256", sha256_file(config_file)}};
    }
    m["config"] = config;
    m["inputs"] = inputs;
    m["seed"] = seed ? Json(*seed) : Json(nullptr);
    m["threads"] = thread_count();
    // One manifest per command so train and eval can share an output directory.
    const fs::path path = out_dir / ("manifest." + command + ".json");
    artifacts["manifest"] = path.string();
    m["artifacts"] = artifacts;
    m["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m["peak_memory"] = {{"peak_rss_bytes", peak_rss_bytes()},
                        {"max_batch_bytes", max_batch_bytes}};
    fs::create_directories(out_dir);
    std::ofstream(path) << m.dump(2) << '\n';
  }
};

struct InputOptions {
  std::string graph;
  std::string features;
  std::vector<std::uint64_t> random_features;  // {dim, seed}
  bool remap_ids = false;
};

struct Inputs {
  CsrGraph graph;
  FeatureMatrix features;
};

void add_input_options(CLI::App* sub, InputOptions& o) {
  sub->add_option("--graph", o.graph, "edge list: whitespace-separated `src dst` per line");
  sub->add_option("--features", o.features, "CSV feature matrix, row i = node i");
  sub->add_option("--random-features", o.random_features,
                  "synthetic unit-variance Gaussian features: DIM SEED")
      ->expected(2);
  sub->add_flag("--remap-ids", o.remap_ids,
                "compact sparse node ids; features must follow the sorted id order");
}

Inputs load_inputs(const InputOptions& o, Run& run) {
  if (o.graph.empty()) throw UsageError("--graph is required");
  const bool has_file = !o.features.empty();
  const bool has_random = !o.random_features.empty();
  if (!has_file && !has_random) {
    throw UsageError("no features: pass --features FILE or --random-features DIM SEED");
  }
  if (has_file && has_random) {
    throw UsageError("--features and --random-features are mutually exclusive");
  }
  Inputs in;
  run.add_input("graph", o.graph);
  if (o.remap_ids) {
    RemappedGraph r = load_edge_list_remapped(o.graph);
    in.graph = std::move(r.graph);
    std::ofstream map(run.artifact("id_map", "id_map.csv"));
    map << "new_id,original_id\n";
    for (std::size_t i = 0; i < r.original_ids.size(); ++i) {
      map << i << ',' << r.original_ids[i] << '\n';
    }
  } else {
    in.graph = load_edge_list(o.graph);
  }
  if (has_file) {
    run.add_input("features", o.features);
    in.features = load_features(o.features, in.graph);
  } else {
    const auto dim = o.random_features[0];
    if (dim < 1 || dim > (1u << 20)) throw UsageError("--random-features DIM must be in [1, 2^20]");
    in.features = random_features(in.graph.num_nodes(), static_cast<int>(dim), o.random_features[1]);
    run.inputs["random_features"] = {{"dim", dim}, {"seed", o.random_features[1]}};
  }
  return in;
}

struct TrainOptions {
  TrainConfig cfg;
  std::string arch = "gcn";
  std::string loss = "simclr";
  std::string pairs = "magi";
};

void add_train_options(CLI::App* sub, TrainOptions& t) {
  TrainConfig& c = t.cfg;
  sub->add_option("--epochs", c.epochs, "training epochs")->capture_default_str();
  sub->add_option("--walks", c.walk.num_walks, "random walks per node (t)")->capture_default_str();
  sub->add_option("--depth", c.walk.depth, "steps per walk (l)")->capture_default_str();
  sub->add_option("--roots", c.walk.num_roots, "roots per batch on large graphs (n)")
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_flag("--full-config-model", c.walk.full_config_model,
                "exact configuration term instead of 1/|B|");
  sub->add_option("--arch", t.arch, "encoder: gcn or sage")
      ->check(CLI::IsMember({"gcn", "sage"}))
      ->capture_default_str();
  sub->add_option("--layers", c.num_layers, "encoder layers")->capture_default_str();
  sub->add_option("--dim", c.embedding_dim, "width of every layer")->capture_default_str();
  sub->add_option("--alpha", c.leaky_slope, "LeakyReLU negative slope")->capture_default_str();
  sub->add_option("--activate-output", c.activate_output,
                  "apply LeakyReLU on the last layer too")
      ->capture_default_str();
  sub->add_option("--tau", c.tau, "temperature")->capture_default_str();
  sub->add_option("--lr", c.optimizer.learning_rate, "learning rate")->capture_default_str();
  sub->add_option("--wd", c.optimizer.weight_decay, "decoupled weight decay")
      ->capture_default_str();
  sub->add_option("--loss", t.loss, "simclr or simple")
      ->check(CLI::IsMember({"simclr", "simple"}))
      ->capture_default_str();
  sub->add_option("--pairs", t.pairs, "pair rule: magi, ms, ei or hms")
      ->check(CLI::IsMember({"magi", "ms", "ei", "hms"}))
      ->capture_default_str();
  sub->add_flag("--per-pair-denominator", c.per_pair_denominator,
                "one positive per softmax denominator");
  sub->add_option("--high-order", c.high_order, "polynomial order for hms; 0 = depth")
      ->capture_default_str();
  sub->add_option("--full-batch-threshold", c.full_batch_threshold,
                  "graphs up to this size use every node as a root")
      ->capture_default_str();
  sub->add_option("--batches-per-epoch", c.batches_per_epoch, "optimizer steps per epoch")
      ->capture_default_str();
  sub->add_option("--dense-cap", c.dense_cap, "largest N for dense N x N matrices")
      ->capture_default_str();
}

void finalize_train_options(TrainOptions& t) {
  t.cfg.arch = parse_arch(t.arch);
  t.cfg.loss = parse_loss_kind(t.loss);
  t.cfg.pairs = parse_pair_rule(t.pairs);
  try {
    t.cfg.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

Json config_json(const TrainConfig& cfg) {
  Json j = Json::object();
  std::istringstream in(cfg.to_config_text());
  std::string line;
  // Keep the rendering order rather than the map's sorted order.
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

void write_matrix_csv(const Matrix<Real>& m, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c ? "," : "") << fmt::format("{:.9g}", m(r, c));
    }
    out << '\n';
  }
}

void write_labels(const Partition& p, const fs::path& path) {
  std::ofstream out(path);
  for (int a : p.assignment) out << a << '\n';
}

Matrix<Real> embed_from_checkpoint(const std::string& checkpoint, const InputOptions& io,
                                   Run& run) {
  const Inputs in = load_inputs(io, run);
  run.add_input("checkpoint", checkpoint);
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  if (ckpt.params.input_dim() != in.features.dim()) {
    throw InvalidArgument(fmt::format("checkpoint expects {} feature columns, input has {}",
                                      ckpt.params.input_dim(), in.features.dim()));
  }
  return full_graph_embed(in.graph, in.features, ckpt.params);
}

struct EmbeddingSource {
  std::string embeddings;
  std::string checkpoint;
};

void add_embedding_source(CLI::App* sub, EmbeddingSource& s) {
  sub->add_option("--embeddings", s.embeddings, "CSV embeddings, one row per node");
  sub->add_option("--checkpoint", s.checkpoint, "embed with this checkpoint first");
}

Matrix<double> resolve_embeddings(const EmbeddingSource& s, const InputOptions& io, Run& run) {
  if (!s.embeddings.empty() && !s.checkpoint.empty()) {
    throw UsageError("--embeddings and --checkpoint are mutually exclusive");
  }
  if (!s.embeddings.empty()) {
    run.add_input("embeddings", s.embeddings);
    const FeatureMatrix m = load_csv_matrix(s.embeddings);
    Matrix<double> z(m.num_rows(), m.dim());
    for (NodeId i = 0; i < m.num_rows(); ++i) {
      for (int c = 0; c < m.dim(); ++c) z(i, c) = m.row(i)[c];
    }
    return z;
  }
  if (!s.checkpoint.empty()) return embed_from_checkpoint(s.checkpoint, io, run).cast<double>();
  throw UsageError("need --embeddings FILE or --checkpoint FILE");
}

struct ClusterOptions {
  int k = 0;
  int restarts = 10;
  std::uint64_t seed = 0;
};

void add_cluster_options(CLI::App* sub, ClusterOptions& c, bool k_required) {
  auto* k = sub->add_option("--k", c.k, k_required ? "number of clusters"
                                                   : "number of clusters; default = label count");
  if (k_required) k->required();
  sub->add_option("--restarts", c.restarts, "k-means restarts")->capture_default_str();
  sub->add_option("--kmeans-seed", c.seed, "k-means seed")->capture_default_str();
}

TrainHooks progress_hooks(Run& run, std::ostream& err, int log_every) {
  TrainHooks hooks;
  hooks.log = &err;
  hooks.on_epoch = [&run, &err, log_every](const EpochRecord& rec) {
    run.max_batch_bytes = std::max(run.max_batch_bytes, rec.batch_bytes);
    if (log_every > 0 && rec.epoch % log_every == 0) {
      err << fmt::format("epoch {:5d}  loss {:.6f}  batch {}  positives {}  {:.3f}s\n", rec.epoch,
                         rec.loss, rec.batch_size, rec.positives, rec.seconds);
    }
  };
  return hooks;
}

// ---- commands ----

int cmd_train(Run& run, const InputOptions& io, TrainOptions& t, const std::string& resume_from,
              const std::string& export_csv, int checkpoint_every, int log_every,
              std::ostream& out, std::ostream& err) {
  finalize_train_options(t);
  TrainConfig& cfg = t.cfg;
  if (checkpoint_every < 0) throw UsageError("--checkpoint-every must be >= 0");
  if (!resume_from.empty() && fs::exists(run.out_dir / "model.ckpt") &&
      fs::equivalent(resume_from, run.out_dir / "model.ckpt")) {
    throw UsageError("--resume points at the checkpoint this run would overwrite; use another --out");
  }
  run.config = config_json(cfg);
  run.config["checkpoint-every"] = checkpoint_every;
  run.config["resume"] = resume_from;
  run.seed = cfg.seed;
  const Inputs in = load_inputs(io, run);
  cfg.checkpoint_every = checkpoint_every;
  if (checkpoint_every > 0) {
    cfg.checkpoint_dir = run.out_dir / "checkpoints";
    run.artifacts["checkpoints"] = cfg.checkpoint_dir.string();
  }
  const TrainHooks hooks = progress_hooks(run, err, log_every);
  TrainResult result;
  if (resume_from.empty()) {
    result = train(in.graph, in.features, cfg, hooks);
  } else {
    run.add_input("resume", resume_from);
    result = resume(fs::path(resume_from), in.graph, in.features, cfg, hooks);
  }
  save_checkpoint(result.to_checkpoint(cfg), run.artifact("checkpoint", "model.ckpt"));
  const fs::path trace = run.artifact("trace", "trace.csv");
  const bool append = !resume_from.empty() && fs::exists(trace);
  std::ofstream(trace, append ? std::ios::app : std::ios::trunc) << result.trace.to_csv(!append);
  if (!export_csv.empty()) {
    export_params_csv(result.params, export_csv);
    run.artifacts["export_csv"] = export_csv;
  }
  const double last = result.trace.records.empty() ? 0.0 : result.trace.records.back().loss;
  out << fmt::format("trained to epoch {}; final loss {:.6f}; checkpoint {}\n",
                     result.epochs_completed, last, run.artifacts["checkpoint"].get<std::string>());
  return kExitOk;
}

int cmd_embed(Run& run, const InputOptions& io, const std::string& checkpoint, std::ostream& out) {
  if (checkpoint.empty()) throw UsageError("--checkpoint is required");
  const Matrix<Real> z = embed_from_checkpoint(checkpoint, io, run);
  const fs::path path = run.artifact("embeddings", "embeddings.csv");
  write_matrix_csv(z, path);
  out << fmt::format("wrote {} x {} embeddings to {}\n", z.rows(), z.cols(), path.string());
  return kExitOk;
}

int cmd_cluster(Run& run, const InputOptions& io, const EmbeddingSource& src,
                const ClusterOptions& c, std::ostream& out) {
  run.config = {{"k", c.k}, {"restarts", c.restarts}, {"kmeans-seed", c.seed}};
  run.seed = c.seed;
  const Matrix<double> z = resolve_embeddings(src, io, run);
  const KMeansResult km = kmeans(z, c.k, c.seed, c.restarts);
  const fs::path path = run.artifact("clusters", "clusters.txt");
  write_labels(km.assignment, path);
  out << fmt::format("k-means k={} inertia {:.6f} iterations {}; assignments in {}\n", c.k,
                     km.inertia, km.iterations, path.string());
  return kExitOk;
}

int cmd_eval(Run& run, const InputOptions& io, const EmbeddingSource& src,
             const std::string& assignments, const std::string& labels_path, ClusterOptions c,
             bool table, std::ostream& out) {
  if (labels_path.empty()) throw UsageError("--labels is required");
  run.add_input("labels", labels_path);
  const Partition truth = load_labels(labels_path);
  Partition pred;
  if (!assignments.empty()) {
    if (!src.embeddings.empty() || !src.checkpoint.empty()) {
      throw UsageError("--assignments excludes --embeddings and --checkpoint");
    }
    run.add_input("assignments", assignments);
    pred = load_labels(assignments);
    run.config = Json::object();
  } else {
    if (c.k == 0) c.k = truth.num_clusters;
    run.config = {{"k", c.k}, {"restarts", c.restarts}, {"kmeans-seed", c.seed}};
    run.seed = c.seed;
    const Matrix<double> z = resolve_embeddings(src, io, run);
    if (z.rows() != truth.size()) {
      throw InvalidArgument(fmt::format("label file has {} rows for {} embedded nodes",
                                        truth.size(), z.rows()));
    }
    pred = kmeans(z, c.k, c.seed, c.restarts).assignment;
  }
  if (pred.size() != truth.size()) {
    throw InvalidArgument(fmt::format("label file has {} rows for {} predictions", truth.size(),
                                      pred.size()));
  }
  const MetricsReport m = evaluate(pred, truth);
  std::ofstream(run.artifact("metrics", "metrics.json")) << m.to_json() << '\n';
  out << m.to_json() << '\n';
  if (table) out << m.to_table();
  return kExitOk;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_ablate(Run& run, const InputOptions& io, TrainOptions& t, const std::string& labels_path,
               ClusterOptions c, const std::vector<std::uint64_t>& seeds,
               const std::vector<std::string>& losses, const std::vector<std::string>& rules,
               int log_every, std::ostream& out, std::ostream& err) {
  finalize_train_options(t);
  if (labels_path.empty()) throw UsageError("--labels is required");
  if (seeds.empty()) throw UsageError("--seeds needs at least one seed");
  const Inputs in = load_inputs(io, run);
  run.add_input("labels", labels_path);
  const Partition truth = load_labels(labels_path);
  if (truth.size() != in.graph.num_nodes()) {
    throw InvalidArgument(fmt::format("label file has {} rows for {} nodes", truth.size(),
                                      in.graph.num_nodes()));
  }
  if (c.k == 0) c.k = truth.num_clusters;
  run.config = config_json(t.cfg);
  run.config["k"] = c.k;
  run.config["restarts"] = c.restarts;
  run.config["seeds"] = seeds;
  run.config["losses"] = losses;
  run.config["pair-rules"] = rules;

  std::ofstream csv(run.artifact("ablation", "ablation.csv"));
  csv << "loss,pairs,seed,status,acc,nmi,ari,f1,seconds\n";
  struct Summary {
    std::string loss, pairs, status = "ok";
    std::vector<double> acc, nmi, ari, f1;
  };
  std::vector<Summary> summaries;
  const TrainHooks hooks = progress_hooks(run, err, log_every);
  for (const auto& loss : losses) {
    for (const auto& rule : rules) {
      Summary s{loss, rule};
      for (std::uint64_t seed : seeds) {
        TrainConfig cfg = t.cfg;
        cfg.loss = parse_loss_kind(loss);
        cfg.pairs = parse_pair_rule(rule);
        cfg.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        std::string status = "ok";
        MetricsReport m;
        if (cfg.pairs == PairRule::kHighOrder && in.graph.num_nodes() > cfg.dense_cap) {
          status = "oom-skipped";
        } else {
          try {
            err << fmt::format("[ablate] loss={} pairs={} seed={}\n", loss, rule, seed);
            const TrainResult r = train(in.graph, in.features, cfg, hooks);
            const Matrix<Real> z = full_graph_embed(in.graph, in.features, r.params);
            m = evaluate(kmeans(z.cast<double>(), c.k, seed, c.restarts).assignment, truth);
          } catch (const CapacityExceeded&) {
            status = "oom-skipped";
          } catch (const TrainingAborted& e) {
            status = "aborted";
            err << "[ablate] " << e.what() << '\n';
          }
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        csv << fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.3f}\n", loss, rule, seed,
                           status, m.acc, m.nmi, m.ari, m.f1, secs);
        csv.flush();
        if (status == "ok") {
          s.acc.push_back(m.acc);
          s.nmi.push_back(m.nmi);
          s.ari.push_back(m.ari);
          s.f1.push_back(m.f1);
        } else {
          s.status = status;
        }
      }
      summaries.push_back(std::move(s));
    }
  }
  out << fmt::format("{:<8} {:<6} {:>8} {:>8} {:>8} {:>8}  {}\n", "loss", "pairs", "ACC", "NMI",
                     "ARI", "F1", "status (medians over seeds)");
  for (const auto& s : summaries) {
    if (s.nmi.empty()) {
      out << fmt::format("{:<8} {:<6} {:>8} {:>8} {:>8} {:>8}  {}\n", s.loss, s.pairs, "-", "-",
                         "-", "-", s.status);
    } else {
      out << fmt::format("{:<8} {:<6} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f}  {}\n", s.loss,
                         s.pairs, median(s.acc), median(s.nmi), median(s.ari), median(s.f1),
                         s.status);
    }
  }
  return kExitOk;
}

int cmd_oracle(Run& run, std::uint64_t seed, bool perturb, const std::string& export_path,
               const std::string& graph, int order, std::ostream& out) {
  run.seed = seed;
  run.config = {{"perturb", perturb}};
  if (!export_path.empty()) {
    if (graph.empty()) throw UsageError("--export-modularity needs --graph");
    if (order < 1) throw UsageError("--order must be >= 1");
    run.add_input("graph", graph);
    const CsrGraph g = load_edge_list(graph);
    const DenseModularityMatrix b =
        order == 1 ? dense_modularity_matrix(g) : high_order_modularity_matrix(g, order);
    std::ofstream csv(export_path);
    for (Eigen::Index r = 0; r < b.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < b.values.cols(); ++c) {
        csv << (c ? "," : "") << fmt::format("{:.17g}", b.values(r, c));
      }
      csv << '\n';
    }
    run.artifacts["modularity_csv"] = export_path;
    out << fmt::format("wrote {}x{} modularity matrix (order {}) to {}\n", b.size(), b.size(),
                       order, export_path);
    return kExitOk;
  }
  oracle::SuiteOptions opts;
  opts.seed = seed;
  opts.gradient_perturbation = perturb ? 1e-2 : 0.0;
  int failed = 0;
  for (const auto& r : oracle::run_suite(opts)) {
    failed += !r.passed;
    out << fmt::format("{}  {:<30} observed {:.3e}  tolerance {:.1e}  {}\n",
                       r.passed ? "PASS" : "FAIL", r.name, r.observed, r.tolerance, r.detail);
  }
  out << (failed == 0 ? "all oracle checks passed\n"
                      : fmt::format("{} oracle check(s) failed\n", failed));
  return failed == 0 ? kExitOk : kExitFailure;
}

// Reads `key = value` lines and appends `--key=value` for keys the command
// line does not already set. Keys that belong to another command are ignored.
std::vector<std::string> apply_config_file(std::vector<std::string> args, const CLI::App& app,
                                           std::string* config_path) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  *config_path = path;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  const CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (sub == nullptr) return args;
  auto given = [&](const std::string& key) {
    for (const auto& a : args) {
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  std::string line;
  int line_no = 0;
  std::vector<std::string> injected;
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#' || line[b] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("{}:{}: expected `key = value`", path, line_no));
    }
    auto trim = [](std::string s) {
      const auto x = s.find_first_not_of(" \t\r\"");
      if (x == std::string::npos) return std::string();
      return s.substr(x, s.find_last_not_of(" \t\r\"") - x + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool known_anywhere = false;
    for (const CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; })) {
      known_anywhere |= s->get_option_no_throw("--" + key) != nullptr;
    }
    if (!known_anywhere) {
      throw UsageError(fmt::format("{}:{}: unknown key '{}'", path, line_no, key));
    }
    if (sub->get_option_no_throw("--" + key) == nullptr || given(key)) continue;
    injected.push_back("--" + key + "=" + value);
  }
  args.insert(args.end(), injected.begin(), injected.end());
  return args;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 unavailable");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MAGI: modularity-aware contrastive graph clustering", "magi"};
  app.require_subcommand(1);
  Run run;
  run.args = raw_args;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", run.out_dir, "artifact directory")->capture_default_str();
    sub->add_option("--config", run.config_file, "`key = value` file; flags take precedence");
    sub->add_option("--threads", run.threads, "worker cap (also MAGI_THREADS)");
  };

  InputOptions io;
  TrainOptions topts;
  std::string resume_from, export_csv, checkpoint, assignments, labels;
  int checkpoint_every = 0, log_every = 10;
  EmbeddingSource src;
  ClusterOptions copts;
  bool table = false;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::vector<std::string> losses = {"simclr", "simple"};
  std::vector<std::string> rules = {"magi", "ms", "ei", "hms"};
  std::uint64_t oracle_seed = 1;
  bool perturb = false;
  std::string export_modularity;
  int order = 1;

  CLI::App* train_cmd = app.add_subcommand("train", "train an encoder; writes model.ckpt, trace.csv");
  common(train_cmd);
  add_input_options(train_cmd, io);
  add_train_options(train_cmd, topts);
  train_cmd->add_option("--resume", resume_from, "continue from this checkpoint");
  train_cmd->add_option("--export-csv", export_csv, "also dump weights as CSV into this directory");
  train_cmd->add_option("--checkpoint-every", checkpoint_every, "epochs between checkpoints; 0 = off");
  train_cmd->add_option("--log-every", log_every, "epochs between progress lines; 0 = quiet")
      ->capture_default_str();

  CLI::App* embed_cmd = app.add_subcommand("embed", "embed every node with a checkpoint");
  common(embed_cmd);
  add_input_options(embed_cmd, io);
  embed_cmd->add_option("--checkpoint", checkpoint, "trained checkpoint");

  CLI::App* cluster_cmd = app.add_subcommand("cluster", "k-means over embeddings");
  common(cluster_cmd);
  add_input_options(cluster_cmd, io);
  add_embedding_source(cluster_cmd, src);
  add_cluster_options(cluster_cmd, copts, true);

  CLI::App* eval_cmd = app.add_subcommand("eval", "cluster and score against labels (ACC/NMI/ARI/F1)");
  common(eval_cmd);
  add_input_options(eval_cmd, io);
  add_embedding_source(eval_cmd, src);
  add_cluster_options(eval_cmd, copts, false);
  eval_cmd->add_option("--assignments", assignments, "score this cluster file instead");
  eval_cmd->add_option("--labels", labels, "ground-truth label per line");
  eval_cmd->add_flag("--table", table, "also print a human-readable table");

  CLI::App* ablate_cmd = app.add_subcommand("ablate", "loss x pair-rule grid with shared seeds");
  common(ablate_cmd);
  add_input_options(ablate_cmd, io);
  add_train_options(ablate_cmd, topts);
  add_cluster_options(ablate_cmd, copts, false);
  ablate_cmd->add_option("--labels", labels, "ground-truth label per line");
  ablate_cmd->add_option("--seeds", seeds, "seeds shared by every variant")->capture_default_str();
  ablate_cmd->add_option("--losses", losses, "losses to compare")
      ->check(CLI::IsMember({"simclr", "simple"}))
      ->capture_default_str();
  ablate_cmd->add_option("--pair-rules", rules, "pair rules to compare")
      ->check(CLI::IsMember({"magi", "ms", "ei", "hms"}))
      ->capture_default_str();
  ablate_cmd->add_option("--log-every", log_every, "epochs between progress lines; 0 = quiet")
      ->capture_default_str();

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "run the reference-oracle checks");
  common(oracle_cmd);
  oracle_cmd->add_option("--seed", oracle_seed, "seed for the randomized checks")->capture_default_str();
  oracle_cmd->add_flag("--perturb", perturb, "corrupt analytic gradients by 1% (harness self-test)");
  oracle_cmd->add_option("--export-modularity", export_modularity, "write the dense modularity CSV");
  oracle_cmd->add_option("--graph", io.graph, "graph for --export-modularity");
  oracle_cmd->add_option("--order", order, "polynomial order for --export-modularity")
      ->capture_default_str();

  try {
    std::string config_path;
    const std::vector<std::string> args = apply_config_file(raw_args, app, &config_path);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (run.threads < 0) throw UsageError("--threads must be >= 0");
    if (run.threads > 0) set_thread_count(run.threads);
    int code = kExitOk;
    if (train_cmd->parsed()) {
      run.command = "train";
      code = cmd_train(run, io, topts, resume_from, export_csv, checkpoint_every, log_every, out, err);
    } else if (embed_cmd->parsed()) {
      run.command = "embed";
      code = cmd_embed(run, io, checkpoint, out);
    } else if (cluster_cmd->parsed()) {
      run.command = "cluster";
      code = cmd_cluster(run, io, src, copts, out);
    } else if (eval_cmd->parsed()) {
      run.command = "eval";
      code = cmd_eval(run, io, src, assignments, labels, copts, table, out);
    } else if (ablate_cmd->parsed()) {
      run.command = "ablate";
      code = cmd_ablate(run, io, topts, labels, copts, seeds, losses, rules, log_every, out, err);
    } else if (oracle_cmd->parsed()) {
      run.command = "oracle";
      code = cmd_oracle(run, oracle_seed, perturb, export_modularity, io.graph, order, out);
    }
    run.write_manifest();
    return code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace magi::app
