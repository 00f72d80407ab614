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
#include "magi/graph.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>

#include "magi/rng.h"

namespace magi {

namespace {

constexpr std::string_view kWhitespace = " \t\r\v\f";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(kWhitespace);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kWhitespace);
  return s.substr(b, e - b + 1);
}

std::string location(const std::filesystem::path& path, std::int64_t line) {
  return path.string() + ":" + std::to_string(line);
}

struct RawEdges {
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  std::int64_t max_id = -1;
};

RawEdges parse_edge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list " + path.string());
  RawEdges raw;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty() || rest.front() == '#') continue;
    std::int64_t ids[2];
    for (int k = 0; k < 2; ++k) {
      rest = trim(rest);
      const char* first = rest.data();
      const char* last = rest.data() + rest.size();
      auto [ptr, ec] = std::from_chars(first, last, ids[k]);
      if (ec != std::errc() || ids[k] < 0 ||
          (ptr != last && kWhitespace.find(*ptr) == std::string_view::npos)) {
        throw ParseError(location(path, line_no) +
                             ": expected two non-negative integer node ids",
                         line_no);
      }
      rest = rest.substr(static_cast<std::size_t>(ptr - first));
    }
    if (!trim(rest).empty()) {
      throw ParseError(location(path, line_no) + ": trailing tokens after edge",
                       line_no);
    }
    raw.max_id = std::max({raw.max_id, ids[0], ids[1]});
    raw.edges.emplace_back(ids[0], ids[1]);
  }
  if (raw.edges.empty()) {
    throw ParseError("edge list " + path.string() + " contains no edges");
  }
  return raw;
}

NodeId checked_node_count(std::int64_t n, const std::filesystem::path& path) {
  if (n > std::numeric_limits<NodeId>::max()) {
    throw ParseError(path.string() + ": node id exceeds 32-bit range");
  }
  return static_cast<NodeId>(n);
}

}  // namespace

CsrGraph CsrGraph::from_edges(NodeId num_nodes,
                              std::span<const std::pair<NodeId, NodeId>> edges) {
  if (num_nodes < 0) throw InvalidArgument("negative node count");
  std::vector<std::pair<NodeId, NodeId>> arcs;
  arcs.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw InvalidArgument("edge (" + std::to_string(u) + ", " +
                            std::to_string(v) + ") outside [0, " +
                            std::to_string(num_nodes) + ")");
    }
    if (u == v) continue;
    arcs.emplace_back(u, v);
    arcs.emplace_back(v, u);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  CsrGraph g;
  g.row_offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  g.degrees_.assign(static_cast<std::size_t>(num_nodes), 0);
  g.neighbors_.reserve(arcs.size());
  for (auto [u, v] : arcs) {
    ++g.degrees_[u];
    g.neighbors_.push_back(v);
  }
  for (NodeId v = 0; v < num_nodes; ++v) {
    g.row_offsets_[v + 1] = g.row_offsets_[v] + g.degrees_[v];
  }
  g.num_edges_ = static_cast<EdgeIndex>(arcs.size() / 2);
  return g;
}

bool CsrGraph::has_edge(NodeId u, NodeId v) const {
  auto row = neighbors(u);
  return std::binary_search(row.begin(), row.end(), v);
}

std::vector<std::pair<NodeId, NodeId>> CsrGraph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(static_cast<std::size_t>(num_edges_));
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

FeatureMatrix::FeatureMatrix(NodeId num_rows, int dim, std::vector<Real> values)
    : num_rows_(num_rows), dim_(dim), values_(std::move(values)) {
  if (num_rows < 0 || dim < 0 ||
      values_.size() != static_cast<std::size_t>(num_rows) * dim) {
    throw InvalidArgument("feature matrix shape does not match value count");
  }
  for (Real x : values_) {
    if (!std::isfinite(x)) throw InvalidArgument("non-finite feature value");
  }
}

CsrGraph load_edge_list(const std::filesystem::path& path,
                        std::optional<NodeId> num_nodes_hint) {
  RawEdges raw = parse_edge_file(path);
  std::int64_t n = raw.max_id + 1;
  if (num_nodes_hint) n = std::max<std::int64_t>(n, *num_nodes_hint);
  const NodeId num_nodes = checked_node_count(n, path);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(raw.edges.size());
  for (auto [u, v] : raw.edges) {
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return CsrGraph::from_edges(num_nodes, edges);
}

RemappedGraph load_edge_list_remapped(const std::filesystem::path& path) {
  RawEdges raw = parse_edge_file(path);
  RemappedGraph out;
  out.original_ids.reserve(raw.edges.size() * 2);
  for (auto [u, v] : raw.edges) {
    out.original_ids.push_back(u);
    out.original_ids.push_back(v);
  }
  std::sort(out.original_ids.begin(), out.original_ids.end());
  out.original_ids.erase(
      std::unique(out.original_ids.begin(), out.original_ids.end()),
      out.original_ids.end());
  checked_node_count(static_cast<std::int64_t>(out.original_ids.size()), path);
  auto to_new = [&](std::int64_t id) {
    return static_cast<NodeId>(
        std::lower_bound(out.original_ids.begin(), out.original_ids.end(), id) -
        out.original_ids.begin());
  };
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(raw.edges.size());
  for (auto [u, v] : raw.edges) edges.emplace_back(to_new(u), to_new(v));
  out.graph = CsrGraph::from_edges(static_cast<NodeId>(out.original_ids.size()),
                                   edges);
  return out;
}

void write_edge_list(const CsrGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# nodes " << graph.num_nodes() << " edges " << graph.num_edges()
      << "\n";
  for (auto [u, v] : graph.edge_list()) out << u << ' ' << v << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

FeatureMatrix load_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV file " + path.string());
  std::vector<Real> values;
  std::string line;
  std::int64_t row = 0;
  int dim = -1;
  while (std::getline(in, line)) {
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    ++row;
    int col = 0;
    while (true) {
      const auto comma = rest.find(',');
      std::string_view cell = trim(rest.substr(0, comma));
      ++col;
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
          !std::isfinite(x)) {
        throw ParseError(location(path, row) + ": column " +
                             std::to_string(col) + " is not a finite number",
                         row);
      }
      values.push_back(static_cast<Real>(x));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (dim < 0) {
      dim = col;
    } else if (col != dim) {
      throw ParseError(location(path, row) + ": expected " +
                           std::to_string(dim) + " columns, found " +
                           std::to_string(col),
                       row);
    }
  }
  if (row == 0) throw ParseError(path.string() + ": no rows");
  return FeatureMatrix(static_cast<NodeId>(row), dim, std::move(values));
}

FeatureMatrix load_features(const std::filesystem::path& path,
                            const CsrGraph& graph) {
  FeatureMatrix m = load_csv_matrix(path);
  if (m.num_rows() != graph.num_nodes()) {
    throw ParseError(path.string() + ": " + std::to_string(m.num_rows()) +
                     " feature rows for a graph with " +
                     std::to_string(graph.num_nodes()) + " nodes");
  }
  return m;
}

FeatureMatrix random_features(NodeId num_rows, int dim, std::uint64_t seed) {
  if (num_rows < 0 || dim <= 0) {
    throw InvalidArgument("random features need rows >= 0 and dim >= 1");
  }
  Rng rng = make_stream(seed, StreamKind::kFeatures, {});
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Real> values(static_cast<std::size_t>(num_rows) * dim);
  for (Real& x : values) x = static_cast<Real>(gauss(rng));
  return FeatureMatrix(num_rows, dim, std::move(values));
}

InducedSubgraph induce_subgraph(const CsrGraph& graph,
                                std::span<const NodeId> nodes) {
  InducedSubgraph sub;
  sub.global_ids.assign(nodes.begin(), nodes.end());
  sub.global_to_local.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeId g = nodes[i];
    if (g < 0 || g >= graph.num_nodes()) {
      throw InvalidArgument("induce_subgraph: node " + std::to_string(g) +
                            " out of range");
    }
    if (!sub.global_to_local.emplace(g, static_cast<NodeId>(i)).second) {
      throw InvalidArgument("induce_subgraph: node " + std::to_string(g) +
                            " repeated");
    }
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (NodeId w : graph.neighbors(nodes[i])) {
      auto it = sub.global_to_local.find(w);
      if (it != sub.global_to_local.end() && static_cast<NodeId>(i) < it->second) {
        edges.emplace_back(static_cast<NodeId>(i), it->second);
      }
    }
  }
  sub.local = CsrGraph::from_edges(static_cast<NodeId>(nodes.size()), edges);
  return sub;
}

}  // namespace magi
