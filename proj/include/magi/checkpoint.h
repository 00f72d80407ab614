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

// Encoder checkpoint file, version 1. All integers and floats little-endian.
//
//   char[8]  magic "MAGICKPT"
//   u32      version (1)
//   u32      arch (0 = GCN, 1 = SAGE)
//   u32      activate_output (0/1)
//   u32      L, number of layers
//   u32[L+1] dims
//   f64      leaky slope
//   per layer: f32[dims[l] * dims[l+1]] weight, row-major;
//              SAGE adds the neighbor weight with the same shape
//   i64      epochs completed
//   u32      byte length, then UTF-8 "key = value" lines of the training config
//   u32      has_optimizer (0/1); if 1:
//     i64 step; f64 lr, weight_decay, beta1, beta2, epsilon;
//     first moments then second moments, in weight order, f32 row-major
//   char[8]  trailer "MAGIEND\0"

#ifndef MAGI_CHECKPOINT_H_
#define MAGI_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "magi/encoder.h"

namespace magi {

struct Checkpoint {
  EncoderParams<Real> params;
  std::int64_t epochs_completed = 0;
  std::string config_text;
  std::optional<OptimizerState<Real>> optimizer;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

// Throws ParseError on a bad magic, unsupported version or truncated file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Debug export: one CSV per weight matrix (layer<l>_w.csv, layer<l>_w_neigh.csv).
void export_params_csv(const EncoderParams<Real>& params,
                       const std::filesystem::path& dir);

}  // namespace magi

#endif  // MAGI_CHECKPOINT_H_
