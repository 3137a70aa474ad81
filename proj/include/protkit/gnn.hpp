/*
 * Copyright 2026 The protkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Forward-pass geometric GNN kernels in double precision. No training.
// Edges are (source j, target i); messages flow j -> i and are summed at i.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "protkit/error.hpp"
#include "protkit/geometry.hpp"
#include "protkit/rng.hpp"
#include "protkit/tensor_io.hpp"

namespace protkit {

enum class Activation { SILU, RELU, IDENTITY };

inline constexpr std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::SILU: return "silu";
    case Activation::RELU: return "relu";
    case Activation::IDENTITY: return "identity";
  }
  return "";
}

inline std::optional<Activation> activation_from_name(std::string_view name) {
  for (auto a : {Activation::SILU, Activation::RELU, Activation::IDENTITY}) {
    if (activation_name(a) == name) return a;
  }
  return std::nullopt;
}

// Hidden layers use `activation`; the final layer is always linear.
struct MlpParams {
  std::vector<int> widths;
  std::vector<Eigen::MatrixXd> weights;  // layer l: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> biases;
  Activation activation = Activation::SILU;
  std::uint64_t seed = 0;

  int in_dim() const { return widths.empty() ? 0 : widths.front(); }
  int out_dim() const { return widths.empty() ? 0 : widths.back(); }

  void validate() const {
    if (widths.size() < 2) fail(ErrorKind::DimensionMismatch, "MLP needs at least two widths");
    if (weights.size() + 1 != widths.size() || biases.size() != weights.size()) {
      fail(ErrorKind::DimensionMismatch, "MLP layer count does not match widths");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l] || biases[l].size() != widths[l + 1]) {
        fail(ErrorKind::DimensionMismatch, "MLP layer " + std::to_string(l) + " has wrong shape");
      }
      if (!weights[l].allFinite() || !biases[l].allFinite()) fail(ErrorKind::InvalidArgument, "non-finite MLP weight");
    }
  }
};

inline double activate(Activation a, double v) {
  switch (a) {
    case Activation::SILU: return v / (1.0 + std::exp(-v));
    case Activation::RELU: return v > 0.0 ? v : 0.0;
    case Activation::IDENTITY: return v;
  }
  return v;
}

inline Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x) {
  if (p.weights.empty() || x.size() != p.weights.front().cols()) {
    fail(ErrorKind::DimensionMismatch, "MLP input has width " + std::to_string(x.size()));
  }
  Eigen::VectorXd h = x;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    h = p.weights[l] * h + p.biases[l];
    if (l + 1 < p.weights.size()) h = h.unaryExpr([&p](double v) { return activate(p.activation, v); });
  }
  return h;
}

// Weights uniform in (-sqrt(6/fan_in), sqrt(6/fan_in)), biases in
// (-1/sqrt(fan_in), 1/sqrt(fan_in)); draws in row-major order, layer by layer.
inline MlpParams seeded_init(std::span<const int> widths, Activation activation, std::uint64_t seed) {
  if (widths.size() < 2) fail(ErrorKind::InvalidArgument, "MLP needs at least two widths");
  for (int w : widths) {
    if (w <= 0) fail(ErrorKind::InvalidArgument, "MLP widths must be positive");
  }
  MlpParams p;
  p.widths.assign(widths.begin(), widths.end());
  p.activation = activation;
  p.seed = seed;
  CounterRng rng(seed);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double fan_in = widths[l];
    const double wb = std::sqrt(6.0 / fan_in);
    const double bb = 1.0 / std::sqrt(fan_in);
    Eigen::MatrixXd w(widths[l + 1], widths[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = wb * rng.uniform_symmetric();
    }
    Eigen::VectorXd b(widths[l + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = bb * rng.uniform_symmetric();
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  return p;
}

inline MlpParams seeded_init(std::initializer_list<int> widths, Activation activation, std::uint64_t seed) {
  return seeded_init(std::span<const int>(widths.begin(), widths.size()), activation, seed);
}

namespace gnn_detail {

inline void check_graph(const Eigen::MatrixXd& S, const Eigen::MatrixX3d& X, const GraphTopology& g) {
  if (S.rows() != X.rows() || static_cast<std::size_t>(X.rows()) != g.num_nodes) {
    fail(ErrorKind::DimensionMismatch, "node counts of S, X and topology differ");
  }
  for (const auto& [src, dst] : g.edges) {
    if (src >= g.num_nodes || dst >= g.num_nodes) fail(ErrorKind::DimensionMismatch, "edge index out of range");
  }
}

inline void check_mlp(const MlpParams& p, Eigen::Index in, std::optional<Eigen::Index> out, std::string_view what) {
  p.validate();
  if (p.in_dim() != in || (out && p.out_dim() != *out)) {
    fail(ErrorKind::DimensionMismatch, std::string(what) + " has incompatible widths");
  }
}

inline Vec3 row(const Eigen::MatrixX3d& X, std::size_t i) { return X.row(static_cast<Eigen::Index>(i)).transpose(); }

}  // namespace gnn_detail

// ---------------------------------------------------------------- SchNet

struct SchNetParams {
  std::vector<double> rbf_centers;  // Angstrom
  double rbf_gamma = 10.0;          // 1 / Angstrom^2
  MlpParams filter_mlp;             // rbf dim -> feature dim

  void validate() const {
    if (rbf_centers.empty()) fail(ErrorKind::InvalidArgument, "no RBF centers");
    for (std::size_t k = 1; k < rbf_centers.size(); ++k) {
      if (!(rbf_centers[k] > rbf_centers[k - 1])) fail(ErrorKind::InvalidArgument, "RBF centers must increase");
    }
  }
};

inline Eigen::VectorXd rbf_expand(double d, const SchNetParams& p) {
  if (!(d >= 0.0)) fail(ErrorKind::InvalidArgument, "distance must be >= 0");
  Eigen::VectorXd g(static_cast<Eigen::Index>(p.rbf_centers.size()));
  for (std::size_t k = 0; k < p.rbf_centers.size(); ++k) {
    const double t = d - p.rbf_centers[k];
    g(static_cast<Eigen::Index>(k)) = std::exp(-p.rbf_gamma * t * t);
  }
  return g;
}

inline std::vector<double> linear_centers(double lo, double hi, std::size_t count) {
  std::vector<double> c(count);
  for (std::size_t k = 0; k < count; ++k) c[k] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (count - 1);
  return c;
}

inline Eigen::MatrixXd schnet_layer(const Eigen::MatrixXd& S, const Eigen::MatrixX3d& X, const GraphTopology& g,
                                    const SchNetParams& p) {
  gnn_detail::check_graph(S, X, g);
  p.validate();
  gnn_detail::check_mlp(p.filter_mlp, static_cast<Eigen::Index>(p.rbf_centers.size()), S.cols(), "SchNet filter");
  Eigen::MatrixXd out = S;
  for (const auto& [j, i] : g.edges) {
    const double d = (gnn_detail::row(X, i) - gnn_detail::row(X, j)).norm();
    const Eigen::VectorXd w = mlp_forward(p.filter_mlp, rbf_expand(d, p));
    out.row(static_cast<Eigen::Index>(i)) += S.row(static_cast<Eigen::Index>(j)).cwiseProduct(w.transpose());
  }
  return out;
}

// ---------------------------------------------------------------- EGNN

struct EgnnParams {
  MlpParams message_mlp;  // [s_i | s_j | d] -> m
  MlpParams update_mlp;   // [s_i | sum m] -> s'
  MlpParams coord_mlp;    // [s_i | s_j | d] -> 1
};

inline Eigen::VectorXd edge_input(const Eigen::MatrixXd& S, std::size_t i, std::size_t j, double d) {
  const Eigen::Index dim = S.cols();
  Eigen::VectorXd in(2 * dim + 1);
  in.head(dim) = S.row(static_cast<Eigen::Index>(i)).transpose();
  in.segment(dim, dim) = S.row(static_cast<Eigen::Index>(j)).transpose();
  in(2 * dim) = d;
  return in;
}

inline std::pair<Eigen::MatrixXd, Eigen::MatrixX3d> egnn_layer(const Eigen::MatrixXd& S, const Eigen::MatrixX3d& X,
                                                              const GraphTopology& g, const EgnnParams& p) {
  gnn_detail::check_graph(S, X, g);
  const Eigen::Index dim = S.cols();
  gnn_detail::check_mlp(p.message_mlp, 2 * dim + 1, std::nullopt, "EGNN message MLP");
  gnn_detail::check_mlp(p.coord_mlp, 2 * dim + 1, 1, "EGNN coordinate MLP");
  gnn_detail::check_mlp(p.update_mlp, dim + p.message_mlp.out_dim(), std::nullopt, "EGNN update MLP");

  const auto n = static_cast<Eigen::Index>(g.num_nodes);
  Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(n, p.message_mlp.out_dim());
  Eigen::MatrixX3d X_out = X;
  for (const auto& [j, i] : g.edges) {
    const Vec3 xij = gnn_detail::row(X, i) - gnn_detail::row(X, j);
    const Eigen::VectorXd in = edge_input(S, i, j, xij.norm());
    agg.row(static_cast<Eigen::Index>(i)) += mlp_forward(p.message_mlp, in).transpose();
    X_out.row(static_cast<Eigen::Index>(i)) += (xij * mlp_forward(p.coord_mlp, in)(0)).transpose();
  }
  Eigen::MatrixXd S_out(n, p.update_mlp.out_dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd in(dim + agg.cols());
    in.head(dim) = S.row(i).transpose();
    in.tail(agg.cols()) = agg.row(i).transpose();
    S_out.row(i) = mlp_forward(p.update_mlp, in).transpose();
  }
  return {S_out, X_out};
}

// ---------------------------------------------------------------- GCP

struct GcpFrame {
  Vec3 a, b, c;
};

// a = (x_i - x_j)/|.|, b = (x_i x x_j)/|.|, c = a x b, per edge (j -> i).
// b uses absolute positions, so frames move with the origin.
inline std::vector<GcpFrame> gcp_frames(const Eigen::MatrixX3d& X, const GraphTopology& g) {
  std::vector<GcpFrame> frames;
  frames.reserve(g.edges.size());
  for (const auto& [j, i] : g.edges) {
    const Vec3 xi = gnn_detail::row(X, i);
    const Vec3 xj = gnn_detail::row(X, j);
    const Vec3 diff = xi - xj;
    const Vec3 cross = xi.cross(xj);
    const double dn = diff.norm();
    const double cn = cross.norm();
    if (dn < kGeometryEps || cn < kGeometryEps * std::max(1.0, xi.norm() * xj.norm())) {
      fail(ErrorKind::DegenerateFrame, "edge " + std::to_string(j) + "->" + std::to_string(i) + " has no frame");
    }
    GcpFrame f;
    f.a = diff / dn;
    f.b = cross / cn;
    f.c = f.a.cross(f.b);
    frames.push_back(f);
  }
  return frames;
}

using NodeVectors = std::vector<std::vector<Vec3>>;  // [node][channel]

struct GcpParams {
  int vector_channels = 2;
  MlpParams message_mlp;  // [s_i | s_j | V_i, V_j projected on (a,b,c) | d] -> h
  MlpParams gate_mlp;     // h -> channels * (3 + 2 * channels) combination weights
  MlpParams node_mlp;     // h -> scalar dim
};

inline GcpParams gcp_init(int scalar_dim, int vector_channels, int hidden, std::uint64_t seed) {
  const int proj = 6 * vector_channels;
  GcpParams p;
  p.vector_channels = vector_channels;
  p.message_mlp = seeded_init({2 * scalar_dim + proj + 1, hidden, hidden}, Activation::SILU, seed);
  p.gate_mlp = seeded_init({hidden, vector_channels * (3 + 2 * vector_channels)}, Activation::SILU, seed + 1);
  p.node_mlp = seeded_init({hidden, hidden, scalar_dim}, Activation::SILU, seed + 2);
  return p;
}

// Edge messages are frame-invariant scalars; vector messages recombine the
// frame axes with the endpoint vectors. Residual on both S and V.
inline std::pair<Eigen::MatrixXd, NodeVectors> gcp_layer(const Eigen::MatrixXd& S, const NodeVectors& V,
                                                         const Eigen::MatrixX3d& X, const GraphTopology& g,
                                                         const GcpParams& p) {
  gnn_detail::check_graph(S, X, g);
  const auto nv = static_cast<std::size_t>(p.vector_channels);
  if (V.size() != g.num_nodes) fail(ErrorKind::DimensionMismatch, "vector feature count differs from node count");
  for (const auto& v : V) {
    if (v.size() != nv) fail(ErrorKind::DimensionMismatch, "wrong number of vector channels");
  }
  const Eigen::Index dim = S.cols();
  const Eigen::Index proj = 6 * static_cast<Eigen::Index>(nv);
  gnn_detail::check_mlp(p.message_mlp, 2 * dim + proj + 1, std::nullopt, "GCP message MLP");
  const Eigen::Index hidden = p.message_mlp.out_dim();
  const auto per_channel = static_cast<Eigen::Index>(3 + 2 * nv);
  gnn_detail::check_mlp(p.gate_mlp, hidden, per_channel * static_cast<Eigen::Index>(nv), "GCP gate MLP");
  gnn_detail::check_mlp(p.node_mlp, hidden, dim, "GCP node MLP");

  const std::vector<GcpFrame> frames = gcp_frames(X, g);
  const auto n = static_cast<Eigen::Index>(g.num_nodes);
  Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(n, hidden);
  NodeVectors V_out = V;

  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto [j, i] = g.edges[e];
    const GcpFrame& f = frames[e];
    Eigen::VectorXd in(2 * dim + proj + 1);
    in.head(dim) = S.row(static_cast<Eigen::Index>(i)).transpose();
    in.segment(dim, dim) = S.row(static_cast<Eigen::Index>(j)).transpose();
    Eigen::Index col = 2 * dim;
    for (const auto* node : {&V[i], &V[j]}) {
      for (const Vec3& v : *node) {
        in(col++) = v.dot(f.a);
        in(col++) = v.dot(f.b);
        in(col++) = v.dot(f.c);
      }
    }
    in(col) = (gnn_detail::row(X, i) - gnn_detail::row(X, j)).norm();

    const Eigen::VectorXd m = mlp_forward(p.message_mlp, in);
    agg.row(static_cast<Eigen::Index>(i)) += m.transpose();
    const Eigen::VectorXd w = mlp_forward(p.gate_mlp, m);
    for (std::size_t k = 0; k < nv; ++k) {
      const Eigen::Index base = static_cast<Eigen::Index>(k) * per_channel;
      Vec3 msg = w(base) * f.a + w(base + 1) * f.b + w(base + 2) * f.c;
      for (std::size_t l = 0; l < nv; ++l) {
        msg += w(base + 3 + static_cast<Eigen::Index>(l)) * V[i][l];
        msg += w(base + 3 + static_cast<Eigen::Index>(nv + l)) * V[j][l];
      }
      V_out[i][k] += msg;
    }
  }

  Eigen::MatrixXd S_out = S;
  for (Eigen::Index i = 0; i < n; ++i) S_out.row(i) += mlp_forward(p.node_mlp, agg.row(i).transpose()).transpose();
  return {S_out, V_out};
}

// ---------------------------------------------------------------- noise predictor

struct NoisePredictorParams {
  MlpParams dist_mlp;   // 1 -> h
  MlpParams score_mlp;  // 2d + h -> 1
};

inline NoisePredictorParams noise_predictor_init(int scalar_dim, int hidden, std::uint64_t seed) {
  NoisePredictorParams p;
  p.dist_mlp = seeded_init({1, hidden, hidden}, Activation::SILU, seed);
  p.score_mlp = seeded_init({2 * scalar_dim + hidden, hidden, 1}, Activation::SILU, seed + 1);
  return p;
}

// eps_i = sum_j m_ij (x_i - x_j) / |x_i - x_j|. Depends on differences only.
inline Eigen::MatrixX3d noise_predictor(const Eigen::MatrixXd& S, const Eigen::MatrixX3d& X, const GraphTopology& g,
                                        const NoisePredictorParams& p) {
  gnn_detail::check_graph(S, X, g);
  const Eigen::Index dim = S.cols();
  gnn_detail::check_mlp(p.dist_mlp, 1, std::nullopt, "distance MLP");
  gnn_detail::check_mlp(p.score_mlp, 2 * dim + p.dist_mlp.out_dim(), 1, "score MLP");
  Eigen::MatrixX3d eps = Eigen::MatrixX3d::Zero(X.rows(), 3);
  const Eigen::Index h = p.dist_mlp.out_dim();
  for (const auto& [j, i] : g.edges) {
    const Vec3 xij = gnn_detail::row(X, i) - gnn_detail::row(X, j);
    const double d = xij.norm();
    if (d < kGeometryEps) {
      fail(ErrorKind::CoincidentNodes, "nodes " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
    }
    Eigen::VectorXd in(2 * dim + h);
    in.head(dim) = S.row(static_cast<Eigen::Index>(i)).transpose();
    in.segment(dim, dim) = S.row(static_cast<Eigen::Index>(j)).transpose();
    in.tail(h) = mlp_forward(p.dist_mlp, Eigen::VectorXd::Constant(1, d));
    const double m = mlp_forward(p.score_mlp, in)(0);
    eps.row(static_cast<Eigen::Index>(i)) += (m * xij / d).transpose();
  }
  return eps;
}

// ---------------------------------------------------------------- serialisation

// Weights and biases as FKT1 containers, layer by layer (W0, b0, W1, b1, ...).
inline std::vector<std::uint8_t> serialise_mlp(const MlpParams& p) {
  p.validate();
  std::vector<std::uint8_t> out;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    append_tensor(out, Tensor::from_matrix(p.weights[l]));
    Tensor b;
    b.dims = {static_cast<std::uint32_t>(p.biases[l].size())};
    for (Eigen::Index r = 0; r < p.biases[l].size(); ++r) b.data.push_back(static_cast<float>(p.biases[l](r)));
    append_tensor(out, b);
  }
  return out;
}

inline nlohmann::json mlp_manifest(const MlpParams& p) {
  return nlohmann::json{{"widths", p.widths}, {"activation", activation_name(p.activation)}, {"seed", p.seed}};
}

// Inverse of serialise_mlp + mlp_manifest. Values come back at f32 precision.
inline MlpParams load_mlp(const nlohmann::json& manifest, std::span<const std::uint8_t> payload) {
  MlpParams p;
  std::optional<Activation> act;
  try {
    p.widths = manifest.at("widths").get<std::vector<int>>();
    act = activation_from_name(manifest.at("activation").get<std::string>());
    p.seed = manifest.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("bad MLP manifest: ") + e.what());
  }
  if (!act) fail(ErrorKind::InvalidArgument, "unknown activation in MLP manifest");
  p.activation = *act;
  const std::vector<Tensor> tensors = read_tensors(payload);
  if (p.widths.size() < 2 || tensors.size() != 2 * (p.widths.size() - 1)) {
    fail(ErrorKind::DimensionMismatch, "MLP payload tensor count");
  }
  for (std::size_t l = 0; l + 1 < p.widths.size(); ++l) {
    p.weights.push_back(tensors[2 * l].to_matrix());
    const Tensor& b = tensors[2 * l + 1];
    if (b.dims.size() != 1) fail(ErrorKind::DimensionMismatch, "bias tensor is not rank 1");
    Eigen::VectorXd bias(static_cast<Eigen::Index>(b.data.size()));
    for (std::size_t r = 0; r < b.data.size(); ++r) bias(static_cast<Eigen::Index>(r)) = b.data[r];
    p.biases.push_back(std::move(bias));
  }
  p.validate();
  return p;
}

}  // namespace protkit
