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
#ifndef MAGI_RNG_H_
#define MAGI_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace magi {

using Rng = std::mt19937_64;

// Stream purposes. Each keyed stream is independent of every other, so walks
// for different nodes can run in any order and still reproduce bit-for-bit.
enum class StreamKind : std::uint64_t {
  kRootSampling = 1,
  kSubCommunityWalk = 2,
  kSimilarityWalk = 3,
  kWeightInit = 4,
  kKMeans = 5,
  kFeatures = 6,
  kGraph = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable hash of (master seed, kind, keys...) into a stream seed.
inline std::uint64_t stream_seed(std::uint64_t master, StreamKind kind,
                                 std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(kind)));
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_stream(std::uint64_t master, StreamKind kind,
                       std::initializer_list<std::uint64_t> keys) {
  return Rng(stream_seed(master, kind, keys));
}

}  // namespace magi

#endif  // MAGI_RNG_H_
