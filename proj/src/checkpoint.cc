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

#include "magi/checkpoint.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <fmt/format.h>

namespace magi {

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'A', 'G', 'I', 'C', 'K', 'P', 'T'};
constexpr std::array<char, 8> kTrailer = {'M', 'A', 'G', 'I', 'E', 'N', 'D', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxLayers = 64;
constexpr std::uint32_t kMaxDim = 1u << 24;

class Writer {
 public:
  void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void u32(std::uint32_t v) { le(v); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v)); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  void matrix(const Matrix<Real>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) f32(m.data()[i]);
  }
  const std::vector<char>& data() const { return buf_; }

 private:
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> data, std::string name)
      : buf_(std::move(data)), name_(std::move(name)) {}

  void bytes(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::int64_t i64() { return static_cast<std::int64_t>(le<std::uint64_t>()); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
  Matrix<Real> matrix(int rows, int cols) {
    Matrix<Real> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f32();
    return m;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("checkpoint " + name_ + ": " + what);
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) fail("truncated");
  }
  template <typename U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  std::vector<char> buf_;
  std::string name_;
  std::size_t pos_ = 0;
};

void write_matrix_csv(const Matrix<Real>& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c ? "," : "") << fmt::format("{:.9g}", m(r, c));
    }
    out << '\n';
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto& p = ckpt.params;
  p.validate();
  Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(p.arch));
  w.u32(p.activate_output ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(p.num_layers()));
  for (int d : p.dims) w.u32(static_cast<std::uint32_t>(d));
  w.f64(static_cast<double>(p.leaky_slope));
  for (const auto& layer : p.layers) {
    w.matrix(layer.w);
    if (p.arch == Arch::kSage) w.matrix(layer.w_neigh);
  }
  w.i64(ckpt.epochs_completed);
  w.u32(static_cast<std::uint32_t>(ckpt.config_text.size()));
  w.bytes(ckpt.config_text.data(), ckpt.config_text.size());
  w.u32(ckpt.optimizer ? 1 : 0);
  if (ckpt.optimizer) {
    const auto& s = *ckpt.optimizer;
    w.i64(s.step);
    w.f64(s.config.learning_rate);
    w.f64(s.config.weight_decay);
    w.f64(s.config.beta1);
    w.f64(s.config.beta2);
    w.f64(s.config.epsilon);
    for (const auto* moments : {&s.first_moment, &s.second_moment}) {
      for (const auto& layer : *moments) {
        w.matrix(layer.w);
        if (p.arch == Arch::kSage) w.matrix(layer.w_neigh);
      }
    }
  }
  w.bytes(kTrailer.data(), kTrailer.size());

  // Write to a sibling then rename so a crash never leaves a torn file.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  std::vector<char> data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  Reader r(std::move(data), path.string());

  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) r.fail("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) r.fail("unsupported version " + std::to_string(version));

  Checkpoint ckpt;
  auto& p = ckpt.params;
  const std::uint32_t arch = r.u32();
  if (arch > 1) r.fail("unknown arch tag " + std::to_string(arch));
  p.arch = static_cast<Arch>(arch);
  p.activate_output = r.u32() != 0;
  const std::uint32_t layers = r.u32();
  if (layers == 0 || layers > kMaxLayers) r.fail("implausible layer count");
  for (std::uint32_t i = 0; i <= layers; ++i) {
    const std::uint32_t d = r.u32();
    if (d == 0 || d > kMaxDim) r.fail("implausible dimension");
    p.dims.push_back(static_cast<int>(d));
  }
  p.leaky_slope = static_cast<Real>(r.f64());
  auto read_layers = [&] {
    std::vector<LayerWeights<Real>> out;
    for (std::uint32_t l = 0; l < layers; ++l) {
      LayerWeights<Real> lw;
      lw.w = r.matrix(p.dims[l], p.dims[l + 1]);
      if (p.arch == Arch::kSage) lw.w_neigh = r.matrix(p.dims[l], p.dims[l + 1]);
      out.push_back(std::move(lw));
    }
    return out;
  };
  p.layers = read_layers();
  ckpt.epochs_completed = r.i64();
  const std::uint32_t text_len = r.u32();
  ckpt.config_text.resize(text_len);
  r.bytes(ckpt.config_text.data(), text_len);
  if (r.u32() != 0) {
    OptimizerState<Real> s;
    s.step = r.i64();
    s.config.learning_rate = r.f64();
    s.config.weight_decay = r.f64();
    s.config.beta1 = r.f64();
    s.config.beta2 = r.f64();
    s.config.epsilon = r.f64();
    s.first_moment = read_layers();
    s.second_moment = read_layers();
    ckpt.optimizer = std::move(s);
  }
  std::array<char, 8> trailer{};
  r.bytes(trailer.data(), trailer.size());
  if (trailer != kTrailer) r.fail("bad trailer");
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    r.fail(e.what());
  }
  return ckpt;
}

void export_params_csv(const EncoderParams<Real>& params,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (int l = 0; l < params.num_layers(); ++l) {
    write_matrix_csv(params.layers[l].w, dir / fmt::format("layer{}_w.csv", l));
    if (params.arch == Arch::kSage) {
      write_matrix_csv(params.layers[l].w_neigh,
                       dir / fmt::format("layer{}_w_neigh.csv", l));
    }
  }
}

}  // namespace magi
