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
#include "magi/partition.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>

namespace magi {

Partition Partition::from_labels(std::vector<int> labels) {
  Partition p;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      throw InvalidArgument("negative cluster label at node " + std::to_string(i));
    }
  }
  p.num_clusters =
      labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  p.assignment = std::move(labels);
  return p;
}

Partition load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open label file " + path.string());
  std::vector<int> labels;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    int label = 0;
    auto [ptr, ec] = std::from_chars(line.data() + b, line.data() + e + 1, label);
    if (ec != std::errc() || ptr != line.data() + e + 1 || label < 0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": expected a non-negative integer label",
                       line_no);
    }
    labels.push_back(label);
  }
  return Partition::from_labels(std::move(labels));
}

}  // namespace magi
