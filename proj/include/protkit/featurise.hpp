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

// Residue-level (CA) graph featurisation. Scalar columns are concatenated in
// a fixed order and truncated at the scheme:
//
//   [0, 23)   one-hot residue token (23-symbol vocabulary)
//   [23, 39)  positional encoding, 16 dims
//   [39, 43)  sin/cos of kappa, alpha
//   [43, 49)  sin/cos of phi, psi, omega
//   [49, 57)  sin/cos of chi1..chi4
//
// Undefined angles embed as (0, 0).

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "protkit/error.hpp"
#include "protkit/geometry.hpp"
#include "protkit/residue.hpp"
#include "protkit/structure.hpp"

namespace protkit {

enum class FeatureScheme { CA_IDENT, CA_SEQ, CA_ANGLES, CA_BB, CA_SC };

inline constexpr int kPositionalDim = 16;

inline constexpr int scheme_dim(FeatureScheme s) {
  switch (s) {
    case FeatureScheme::CA_IDENT: return 23;
    case FeatureScheme::CA_SEQ: return 39;
    case FeatureScheme::CA_ANGLES: return 43;
    case FeatureScheme::CA_BB: return 49;
    case FeatureScheme::CA_SC: return 57;
  }
  return 0;
}

inline constexpr std::string_view scheme_name(FeatureScheme s) {
  switch (s) {
    case FeatureScheme::CA_IDENT: return "ca_ident";
    case FeatureScheme::CA_SEQ: return "ca_seq";
    case FeatureScheme::CA_ANGLES: return "ca_angles";
    case FeatureScheme::CA_BB: return "ca_bb";
    case FeatureScheme::CA_SC: return "ca_sc";
  }
  return "";
}

inline std::optional<FeatureScheme> scheme_from_name(std::string_view name) {
  for (auto s : {FeatureScheme::CA_IDENT, FeatureScheme::CA_SEQ, FeatureScheme::CA_ANGLES, FeatureScheme::CA_BB,
                 FeatureScheme::CA_SC}) {
    if (scheme_name(s) == name) return s;
  }
  return std::nullopt;
}

struct FeatureOptions {
  // Number residues across all chains instead of restarting at each chain.
  bool global_positions = false;
};

inline Eigen::VectorXd positional_encoding(std::size_t index, int dim = kPositionalDim) {
  if (dim <= 0 || dim % 2 != 0) fail(ErrorKind::OddDimension, "positional encoding needs an even dim");
  Eigen::VectorXd pe(dim);
  for (int k = 0; k < dim / 2; ++k) {
    const double arg = static_cast<double>(index) / std::pow(10000.0, 2.0 * k / dim);
    pe(2 * k) = std::sin(arg);
    pe(2 * k + 1) = std::cos(arg);
  }
  return pe;
}

inline std::pair<double, double> embed_angle(const MaybeAngle& theta) {
  if (!theta) return {0.0, 0.0};
  return {std::sin(*theta), std::cos(*theta)};
}

namespace featurise_detail {

inline std::vector<Vec3> ca_trace(const Chain& chain) {
  std::vector<Vec3> trace;
  trace.reserve(chain.residues.size());
  for (const auto& r : chain.residues) trace.push_back(geometry_detail::require_atom(r, "CA"));
  return trace;
}

inline void put_angle(Eigen::MatrixXd& s, Eigen::Index row, Eigen::Index col, const MaybeAngle& a) {
  const auto [sn, cs] = embed_angle(a);
  s(row, col) = sn;
  s(row, col + 1) = cs;
}

}  // namespace featurise_detail

// One row per residue, chains in order.
inline Eigen::MatrixXd scalar_features(const Structure& s, FeatureScheme scheme, const FeatureOptions& opts = {}) {
  using featurise_detail::put_angle;
  const Eigen::Index rows = static_cast<Eigen::Index>(s.residue_count());
  const int dim = scheme_dim(scheme);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, dim);

  Eigen::Index row = 0;
  std::size_t global_index = 0;
  for (const auto& chain : s.chains) {
    const std::size_t n = chain.residues.size();
    VirtualAngleSet virt;
    DihedralSet bb;
    if (dim > 39) {
      const auto trace = featurise_detail::ca_trace(chain);
      if (n >= 2) {
        virt = virtual_angles(trace);
      } else {
        virt.kappa.assign(n, std::nullopt);
        virt.alpha.assign(n, std::nullopt);
      }
    }
    if (dim > 43) bb = backbone_dihedrals(chain);

    for (std::size_t i = 0; i < n; ++i, ++row, ++global_index) {
      const Residue& res = chain.residues[i];
      out(row, token_of(res.res_type)) = 1.0;
      if (dim > 23) {
        out.block(row, 23, 1, kPositionalDim) =
            positional_encoding(opts.global_positions ? global_index : i).transpose();
      }
      if (dim > 39) {
        put_angle(out, row, 39, virt.kappa[i]);
        put_angle(out, row, 41, virt.alpha[i]);
      }
      if (dim > 43) {
        put_angle(out, row, 43, bb.phi[i]);
        put_angle(out, row, 45, bb.psi[i]);
        put_angle(out, row, 47, bb.omega[i]);
      }
      if (dim > 49) {
        const ChiSet chi = sidechain_torsions(res);
        for (int c = 0; c < 4; ++c) put_angle(out, row, 49 + 2 * c, chi.chi[static_cast<std::size_t>(c)]);
      }
    }
  }
  return out;
}

struct VectorFeatures {
  // Per node: unit(x[i-1] - x[i]) and unit(x[i+1] - x[i]); zero past a chain end.
  std::vector<std::array<Vec3, 2>> node;
  // Per stored edge (source j, target i): unit(x[i] - x[j]).
  std::vector<Vec3> edge;
};

namespace featurise_detail {

inline Vec3 unit_or_throw(const Vec3& v) {
  const double norm = v.norm();
  if (norm < kGeometryEps) fail(ErrorKind::DegenerateGeometry, "coincident CA positions");
  return v / norm;
}

}  // namespace featurise_detail

inline VectorFeatures vector_features(const Structure& s, const GraphTopology& topology) {
  using featurise_detail::unit_or_throw;
  std::vector<Vec3> coords;
  VectorFeatures out;
  for (const auto& chain : s.chains) {
    const auto trace = featurise_detail::ca_trace(chain);
    for (std::size_t i = 0; i < trace.size(); ++i) {
      std::array<Vec3, 2> v{Vec3::Zero(), Vec3::Zero()};
      if (i > 0) v[0] = unit_or_throw(trace[i - 1] - trace[i]);
      if (i + 1 < trace.size()) v[1] = unit_or_throw(trace[i + 1] - trace[i]);
      out.node.push_back(v);
      coords.push_back(trace[i]);
    }
  }
  if (topology.num_nodes != coords.size()) {
    fail(ErrorKind::DimensionMismatch, "topology node count differs from residue count");
  }
  out.edge.reserve(topology.edges.size());
  for (const auto& [src, dst] : topology.edges) out.edge.push_back(unit_or_throw(coords[dst] - coords[src]));
  return out;
}

struct ProteinGraph {
  GraphTopology topology;
  Eigen::MatrixX3d coords;   // CA positions, |V| x 3
  Eigen::MatrixXd scalars;   // |V| x scheme_dim
  VectorFeatures vectors;
  FeatureScheme scheme = FeatureScheme::CA_IDENT;
  std::vector<int> tokens;             // residue token per node
  std::vector<std::size_t> chain_of;   // chain ordinal per node
  std::vector<std::pair<char, int>> residue_ids;  // (chain id, seq index)
  std::size_t k = 16;

  std::size_t num_nodes() const { return topology.num_nodes; }
  Vec3 position(std::size_t i) const { return coords.row(static_cast<Eigen::Index>(i)).transpose(); }
};

// Residues lacking CA are removed; all other atoms are kept.
inline Structure residues_with_ca(const Structure& s) {
  Structure out = s;
  out.chains.clear();
  for (const auto& chain : s.chains) {
    Chain kept{chain.id, {}};
    for (const auto& r : chain.residues) {
      if (r.has("CA")) kept.residues.push_back(r);
    }
    if (!kept.residues.empty()) out.chains.push_back(std::move(kept));
  }
  return out;
}

inline ProteinGraph build_graph(const Structure& s, FeatureScheme scheme, std::size_t k = 16,
                                const FeatureOptions& opts = {}) {
  // Node set is the CA-granularity view; it raises NoCompleteResidues when empty.
  const GranularityResult ca_view = select_granularity(s, Granularity::CA_ONLY);
  const Structure nodes = residues_with_ca(s);

  ProteinGraph g;
  g.scheme = scheme;
  g.k = k;
  const std::size_t n = ca_view.structure.residue_count();
  g.coords.resize(static_cast<Eigen::Index>(n), 3);
  std::vector<Vec3> points;
  points.reserve(n);
  for (std::size_t c = 0; c < nodes.chains.size(); ++c) {
    for (const auto& r : nodes.chains[c].residues) {
      const Vec3& p = r.find("CA")->position;
      g.coords.row(static_cast<Eigen::Index>(points.size())) = p.transpose();
      points.push_back(p);
      g.tokens.push_back(token_of(r.res_type));
      g.chain_of.push_back(c);
      g.residue_ids.emplace_back(nodes.chains[c].id, r.seq_index);
    }
  }
  g.topology = knn_graph(points, k);
  g.scalars = scalar_features(nodes, scheme, opts);
  g.vectors = vector_features(nodes, g.topology);
  return g;
}

}  // namespace protkit
