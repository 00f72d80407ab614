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
#ifndef MAGI_PARTITION_H_
#define MAGI_PARTITION_H_

#include <filesystem>
#include <vector>

#include "magi/types.h"

namespace magi {

// Hard cluster assignment, one entry per node. num_clusters is the max label
// plus one; labels in between may be unused.
struct Partition {
  std::vector<int> assignment;
  int num_clusters = 0;

  // Validates that labels are non-negative and derives num_clusters.
  static Partition from_labels(std::vector<int> labels);

  NodeId size() const { return static_cast<NodeId>(assignment.size()); }
};

// One integer label per line in node order; blank and '#' lines skipped.
Partition load_labels(const std::filesystem::path& path);

}  // namespace magi

#endif  // MAGI_PARTITION_H_
