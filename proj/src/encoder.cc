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

#include "magi/encoder.h"

#include <cmath>
#include <random>

#include "magi/rng.h"

namespace magi {

namespace {

template <typename T>
constexpr T kMinNorm = T(1e-12);

// Symmetric-normalized propagation with self loops. The operator is
// symmetric, so it is also its own adjoint in the backward pass.
template <typename T>
Matrix<T> gcn_propagate(const CsrGraph& g, const Matrix<T>& h) {
  const NodeId n = g.num_nodes();
  Vector<T> inv_sqrt(n);
  for (NodeId u = 0; u < n; ++u) {
    inv_sqrt(u) = T(1) / std::sqrt(static_cast<T>(g.degree(u) + 1));
  }
  Matrix<T> out(h.rows(), h.cols());
  for (NodeId u = 0; u < n; ++u) {
    const T su = inv_sqrt(u);
    out.row(u) = h.row(u) * (su * su);
    for (NodeId v : g.neighbors(u)) out.row(u) += h.row(v) * (su * inv_sqrt(v));
  }
  return out;
}

template <typename T>
Matrix<T> neighbor_mean(const CsrGraph& g, const Matrix<T>& h) {
  Matrix<T> out = Matrix<T>::Zero(h.rows(), h.cols());
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    const auto row = g.neighbors(u);
    if (row.empty()) continue;
    for (NodeId v : row) out.row(u) += h.row(v);
    out.row(u) /= static_cast<T>(row.size());
  }
  return out;
}

// Adjoint of neighbor_mean.
template <typename T>
Matrix<T> neighbor_mean_adjoint(const CsrGraph& g, const Matrix<T>& grad) {
  Matrix<T> out = Matrix<T>::Zero(grad.rows(), grad.cols());
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    const auto row = g.neighbors(u);
    if (row.empty()) continue;
    const T scale = T(1) / static_cast<T>(row.size());
    for (NodeId v : row) out.row(v) += grad.row(u) * scale;
  }
  return out;
}

template <typename T>
bool all_finite(const Matrix<T>& m) {
  return m.size() == 0 || m.allFinite();
}

template <typename T>
bool layer_active(const EncoderParams<T>& p, int layer) {
  return layer + 1 < p.num_layers() || p.activate_output;
}

}  // namespace

std::string to_string(Arch arch) {
  return arch == Arch::kGcn ? "gcn" : "sage";
}

Arch parse_arch(const std::string& name) {
  if (name == "gcn" || name == "GCN") return Arch::kGcn;
  if (name == "sage" || name == "SAGE" || name == "graphsage") return Arch::kSage;
  throw InvalidArgument("unknown encoder architecture '" + name + "'");
}

template <typename T>
EncoderParams<T> EncoderParams<T>::init(Arch arch, std::vector<int> dims,
                                        T leaky_slope, bool activate_output,
                                        std::uint64_t seed) {
  if (dims.size() < 2) throw InvalidArgument("encoder needs at least one layer");
  EncoderParams p;
  p.arch = arch;
  p.dims = std::move(dims);
  p.leaky_slope = leaky_slope;
  p.activate_output = activate_output;
  Rng rng = make_stream(seed, StreamKind::kWeightInit, {});
  auto glorot = [&](int in, int out) {
    if (in < 1 || out < 1) throw InvalidArgument("layer dims must be >= 1");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix<T> w(in, out);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<T>(dist(rng));
    return w;
  };
  for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
    LayerWeights<T> layer;
    layer.w = glorot(p.dims[l], p.dims[l + 1]);
    if (arch == Arch::kSage) layer.w_neigh = glorot(p.dims[l], p.dims[l + 1]);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

template <typename T>
void EncoderParams<T>::validate() const {
  if (layers.empty() || dims.size() != layers.size() + 1) {
    throw InvalidArgument("encoder dims do not match the layer count");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::string where = "layer " + std::to_string(l);
    if (layer.w.rows() != dims[l] || layer.w.cols() != dims[l + 1]) {
      throw InvalidArgument(where + ": weight shape does not chain");
    }
    if (arch == Arch::kSage &&
        (layer.w_neigh.rows() != dims[l] || layer.w_neigh.cols() != dims[l + 1])) {
      throw InvalidArgument(where + ": neighbor weight shape does not chain");
    }
    if (!all_finite(layer.w) || !all_finite(layer.w_neigh)) {
      throw InvalidArgument(where + ": non-finite weight");
    }
  }
}

template <typename T>
Matrix<T> encoder_forward(const CsrGraph& graph, const Matrix<T>& features,
                          const EncoderParams<T>& params,
                          ForwardWorkspace<T>* ws) {
  params.validate();
  if (features.rows() != graph.num_nodes()) {
    throw InvalidArgument("encoder: " + std::to_string(features.rows()) +
                          " feature rows for " +
                          std::to_string(graph.num_nodes()) + " nodes");
  }
  if (features.cols() != params.input_dim()) {
    throw InvalidArgument("encoder: feature dim " +
                          std::to_string(features.cols()) + " != input dim " +
                          std::to_string(params.input_dim()));
  }
  ForwardWorkspace<T> local;
  ForwardWorkspace<T>& w = ws ? *ws : local;
  w = ForwardWorkspace<T>{};
  w.graph = &graph;

  Matrix<T> h = features;
  for (int l = 0; l < params.num_layers(); ++l) {
    const auto& layer = params.layers[l];
    Matrix<T> agg;
    Matrix<T> pre;
    if (params.arch == Arch::kGcn) {
      agg = gcn_propagate(graph, h);
      pre = agg * layer.w;
    } else {
      agg = neighbor_mean(graph, h);
      pre = h * layer.w + agg * layer.w_neigh;
    }
    Matrix<T> next = pre;
    if (layer_active(params, l)) {
      const T slope = params.leaky_slope;
      next = pre.unaryExpr([slope](T x) { return x > T(0) ? x : slope * x; });
    }
    if (ws) {
      w.inputs.push_back(std::move(h));
      w.aggregated.push_back(std::move(agg));
      w.preacts.push_back(std::move(pre));
    }
    h = std::move(next);
  }

  Vector<T> norms = h.rowwise().norm().cwiseMax(kMinNorm<T>);
  Matrix<T> z = norms.cwiseInverse().asDiagonal() * h;
  if (ws) {
    w.output = std::move(h);
    w.row_norms = std::move(norms);
  }
  return z;
}

template <typename T>
Matrix<T> gcn_forward(const InducedSubgraph& sub, const Matrix<T>& features,
                      const EncoderParams<T>& params, ForwardWorkspace<T>* ws) {
  if (params.arch != Arch::kGcn) throw InvalidArgument("gcn_forward: params are not GCN");
  return encoder_forward(sub.local, features, params, ws);
}

template <typename T>
Matrix<T> sage_forward(const InducedSubgraph& sub, const Matrix<T>& features,
                       const EncoderParams<T>& params, ForwardWorkspace<T>* ws) {
  if (params.arch != Arch::kSage) throw InvalidArgument("sage_forward: params are not SAGE");
  return encoder_forward(sub.local, features, params, ws);
}

template <typename T>
EncoderGradients<T> encoder_backward(const ForwardWorkspace<T>& ws,
                                     const EncoderParams<T>& params,
                                     const Matrix<T>& grad_output) {
  if (!ws.ready() || static_cast<int>(ws.preacts.size()) != params.num_layers()) {
    throw InvalidArgument("encoder_backward: forward workspace missing");
  }
  if (grad_output.rows() != ws.output.rows() ||
      grad_output.cols() != ws.output.cols()) {
    throw InvalidArgument("encoder_backward: gradient shape mismatch");
  }
  const CsrGraph& graph = *ws.graph;

  // d/do of o / |o| applied row-wise: (g - z (z . g)) / |o|.
  const Vector<T> inv_norm = ws.row_norms.cwiseInverse();
  const Matrix<T> z = inv_norm.asDiagonal() * ws.output;
  const Vector<T> radial = (z.array() * grad_output.array()).rowwise().sum();
  Matrix<T> grad = inv_norm.asDiagonal() * (grad_output - radial.asDiagonal() * z);

  EncoderGradients<T> grads(params.layers.size());
  for (int l = params.num_layers() - 1; l >= 0; --l) {
    const auto& layer = params.layers[l];
    if (layer_active(params, l)) {
      const T slope = params.leaky_slope;
      grad.array() *= ws.preacts[l].unaryExpr(
          [slope](T x) { return x > T(0) ? T(1) : slope; }).array();
    }
    if (params.arch == Arch::kGcn) {
      grads[l].w = ws.aggregated[l].transpose() * grad;
      if (l > 0) grad = gcn_propagate(graph, Matrix<T>(grad * layer.w.transpose()));
    } else {
      grads[l].w = ws.inputs[l].transpose() * grad;
      grads[l].w_neigh = ws.aggregated[l].transpose() * grad;
      if (l > 0) {
        Matrix<T> through_neigh =
            neighbor_mean_adjoint(graph, Matrix<T>(grad * layer.w_neigh.transpose()));
        grad = grad * layer.w.transpose() + through_neigh;
      }
    }
  }
  return grads;
}

Matrix<Real> full_graph_embed(const CsrGraph& graph, const FeatureMatrix& features,
                              const EncoderParams<Real>& params) {
  if (features.num_rows() != graph.num_nodes()) {
    throw InvalidArgument("full_graph_embed: feature rows do not match graph");
  }
  Eigen::Map<const Matrix<Real>> x(features.values().data(), features.num_rows(),
                                   features.dim());
  return encoder_forward<Real>(graph, Matrix<Real>(x), params);
}

Matrix<Real> gather_rows(const FeatureMatrix& features, std::span<const NodeId> ids) {
  Matrix<Real> out(static_cast<Eigen::Index>(ids.size()), features.dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = features.row(ids[i]);
    for (int c = 0; c < features.dim(); ++c) out(static_cast<Eigen::Index>(i), c) = row[c];
  }
  return out;
}

template <typename T>
OptimizerState<T> OptimizerState<T>::init(const EncoderParams<T>& params,
                                          const OptimizerConfig& config) {
  OptimizerState s;
  s.config = config;
  for (const auto& l : params.layers) {
    LayerWeights<T> zero{Matrix<T>::Zero(l.w.rows(), l.w.cols()),
                         Matrix<T>::Zero(l.w_neigh.rows(), l.w_neigh.cols())};
    s.first_moment.push_back(zero);
    s.second_moment.push_back(zero);
  }
  return s;
}

template <typename T>
void optimizer_step(EncoderParams<T>& params, const EncoderGradients<T>& grads,
                    OptimizerState<T>& state) {
  if (grads.size() != params.layers.size() ||
      state.first_moment.size() != params.layers.size()) {
    throw InvalidArgument("optimizer_step: layer count mismatch");
  }
  for (std::size_t l = 0; l < grads.size(); ++l) {
    const auto& p = params.layers[l];
    const auto& g = grads[l];
    if (g.w.rows() != p.w.rows() || g.w.cols() != p.w.cols() ||
        g.w_neigh.rows() != p.w_neigh.rows() || g.w_neigh.cols() != p.w_neigh.cols()) {
      throw InvalidArgument("optimizer_step: gradient shape mismatch in layer " +
                            std::to_string(l));
    }
    if (!all_finite(g.w) || !all_finite(g.w_neigh)) {
      throw InvalidArgument("optimizer_step: non-finite gradient in layer " +
                            std::to_string(l));
    }
  }

  const OptimizerConfig& c = state.config;
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(c.beta1);
  const T b2 = static_cast<T>(c.beta2);
  const T decay = static_cast<T>(1.0 - c.learning_rate * c.weight_decay);
  const T step_size = static_cast<T>(c.learning_rate / bc1);
  const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
  const T eps = static_cast<T>(c.epsilon);

  auto update = [&](Matrix<T>& w, const Matrix<T>& g, Matrix<T>& m, Matrix<T>& v) {
    if (w.size() == 0) return;
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g.cwiseAbs2();
    w *= decay;
    w.array() -= step_size * m.array() / (v.array().sqrt() * inv_sqrt_bc2 + eps);
  };
  for (std::size_t l = 0; l < grads.size(); ++l) {
    update(params.layers[l].w, grads[l].w, state.first_moment[l].w,
           state.second_moment[l].w);
    update(params.layers[l].w_neigh, grads[l].w_neigh,
           state.first_moment[l].w_neigh, state.second_moment[l].w_neigh);
  }
}

#define MAGI_INSTANTIATE_ENCODER(T)                                               \
  template struct EncoderParams<T>;                                               \
  template struct OptimizerState<T>;                                              \
  template Matrix<T> encoder_forward(const CsrGraph&, const Matrix<T>&,           \
                                     const EncoderParams<T>&,                     \
                                     ForwardWorkspace<T>*);                       \
  template Matrix<T> gcn_forward(const InducedSubgraph&, const Matrix<T>&,        \
                                 const EncoderParams<T>&, ForwardWorkspace<T>*);  \
  template Matrix<T> sage_forward(const InducedSubgraph&, const Matrix<T>&,       \
                                  const EncoderParams<T>&, ForwardWorkspace<T>*); \
  template EncoderGradients<T> encoder_backward(                                  \
      const ForwardWorkspace<T>&, const EncoderParams<T>&, const Matrix<T>&);     \
  template void optimizer_step(EncoderParams<T>&, const EncoderGradients<T>&,     \
                               OptimizerState<T>&);

MAGI_INSTANTIATE_ENCODER(float)
MAGI_INSTANTIATE_ENCODER(double)

#undef MAGI_INSTANTIATE_ENCODER

}  // namespace magi
