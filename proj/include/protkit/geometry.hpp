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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "protkit/error.hpp"
#include "protkit/structure.hpp"

namespace protkit {

// Angles that may be undefined (chain termini, missing atoms). Never NaN.
using MaybeAngle = std::optional<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kGeometryEps = 1e-12;

// Maps any finite angle into [-pi, pi).
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (a >= kPi) a -= 2.0 * kPi;
  return a;
}

// IUPAC torsion p1-p2-p3-p4: 0 when eclipsed (cis), positive for clockwise
// rotation of the near bond onto the far bond viewed along p2->p3.
inline double dihedral(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4) {
  const Vec3 b1 = p2 - p1;
  const Vec3 b2 = p3 - p2;
  const Vec3 b3 = p4 - p3;
  const Vec3 n1 = b1.cross(b2);
  const Vec3 n2 = b2.cross(b3);
  const double b2_norm = b2.norm();
  if (b2_norm < kGeometryEps || n1.norm() < kGeometryEps || n2.norm() < kGeometryEps) {
    fail(ErrorKind::DegenerateGeometry, "dihedral of collinear or coincident points");
  }
  double angle = std::atan2(b2_norm * b1.dot(n2), n1.dot(n2));
  if (angle >= kPi) angle -= 2.0 * kPi;
  return angle;
}

// Angle a-b-c at vertex b, in [0, pi].
inline double bond_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u = a - b;
  const Vec3 v = c - b;
  if (u.norm() < kGeometryEps || v.norm() < kGeometryEps) {
    fail(ErrorKind::DegenerateGeometry, "bond angle with coincident points");
  }
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

struct DihedralSet {
  std::vector<MaybeAngle> phi;
  std::vector<MaybeAngle> psi;
  std::vector<MaybeAngle> omega;
};

namespace geometry_detail {

inline const Vec3& require_atom(const Residue& res, std::string_view name) {
  const Atom* a = res.find(name);
  if (a == nullptr) {
    fail(ErrorKind::MissingAtom,
         "residue " + res.res_name + " " + std::to_string(res.seq_index) + " lacks " + std::string(name));
  }
  return a->position;
}

}  // namespace geometry_detail

inline DihedralSet backbone_dihedrals(const Chain& chain) {
  using geometry_detail::require_atom;
  const std::size_t n = chain.residues.size();
  std::vector<const Vec3*> N(n), CA(n), C(n);
  for (std::size_t i = 0; i < n; ++i) {
    N[i] = &require_atom(chain.residues[i], "N");
    CA[i] = &require_atom(chain.residues[i], "CA");
    C[i] = &require_atom(chain.residues[i], "C");
  }
  DihedralSet out{std::vector<MaybeAngle>(n), std::vector<MaybeAngle>(n), std::vector<MaybeAngle>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out.phi[i] = dihedral(*C[i - 1], *N[i], *CA[i], *C[i]);
    if (i + 1 < n) {
      out.psi[i] = dihedral(*N[i], *CA[i], *C[i], *N[i + 1]);
      out.omega[i] = dihedral(*CA[i], *C[i], *N[i + 1], *CA[i + 1]);
    }
  }
  return out;
}

struct VirtualAngleSet {
  std::vector<MaybeAngle> kappa;  // angle(CA[i-1], CA[i], CA[i+1])
  std::vector<MaybeAngle> alpha;  // torsion(CA[i-1], CA[i], CA[i+1], CA[i+2])
};

inline VirtualAngleSet virtual_angles(std::span<const Vec3> trace) {
  const std::size_t n = trace.size();
  if (n < 2) fail(ErrorKind::TooFewNodes, "virtual angles need at least two CA positions");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if ((trace[i + 1] - trace[i]).norm() < kGeometryEps) {
      fail(ErrorKind::DegenerateGeometry, "coincident consecutive CA positions at " + std::to_string(i));
    }
  }
  VirtualAngleSet out{std::vector<MaybeAngle>(n), std::vector<MaybeAngle>(n)};
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out.kappa[i] = bond_angle(trace[i - 1], trace[i], trace[i + 1]);
  }
  for (std::size_t i = 1; i + 2 < n; ++i) {
    try {
      out.alpha[i] = dihedral(trace[i - 1], trace[i], trace[i + 1], trace[i + 2]);
    } catch (const Error&) {
      // collinear window: no plane, leave undefined
    }
  }
  return out;
}

// Sidechain torsion atom quadruples, IUPAC-IUB 1970 nomenclature (as used by
// the Dunbrack rotamer library). Table version 1.
struct ChiDefinition {
  std::array<std::string_view, 4> atoms;
};

struct ResidueChiTable {
  int count = 0;
  std::array<ChiDefinition, 4> chi{};
};

inline const ResidueChiTable& chi_table(ResidueType type) {
  static const std::array<ResidueChiTable, kNumCanonical + 1> table = [] {
    std::array<ResidueChiTable, kNumCanonical + 1> t{};
    auto set = [&t](ResidueType r, std::initializer_list<std::array<std::string_view, 4>> quads) {
      auto& entry = t[static_cast<std::size_t>(r)];
      for (const auto& q : quads) entry.chi[static_cast<std::size_t>(entry.count++)] = {q};
    };
    // ALA, GLY: no rotatable sidechain bonds.
    set(ResidueType::ARG, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "CD"},
                           {"CB", "CG", "CD", "NE"}, {"CG", "CD", "NE", "CZ"}});
    set(ResidueType::ASN, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "OD1"}});
    set(ResidueType::ASP, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "OD1"}});
    set(ResidueType::CYS, {{"N", "CA", "CB", "SG"}});
    set(ResidueType::GLN, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "CD"}, {"CB", "CG", "CD", "OE1"}});
    set(ResidueType::GLU, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "CD"}, {"CB", "CG", "CD", "OE1"}});
    set(ResidueType::HIS, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "ND1"}});
    set(ResidueType::ILE, {{"N", "CA", "CB", "CG1"}, {"CA", "CB", "CG1", "CD1"}});
    set(ResidueType::LEU, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "CD1"}});
    set(ResidueType::LYS, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "CD"},
                           {"CB", "CG", "CD", "CE"}, {"CG", "CD", "CE", "NZ"}});
    set(ResidueType::MET, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "SD"}, {"CB", "CG", "SD", "CE"}});
    set(ResidueType::PHE, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "CD1"}});
    set(ResidueType::PRO, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "CD"}});
    set(ResidueType::SER, {{"N", "CA", "CB", "OG"}});
    set(ResidueType::THR, {{"N", "CA", "CB", "OG1"}});
    set(ResidueType::TRP, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "CD1"}});
    set(ResidueType::TYR, {{"N", "CA", "CB", "CG"}, {"CA", "CB", "CG", "CD1"}});
    set(ResidueType::VAL, {{"N", "CA", "CB", "CG1"}});
    return t;
  }();
  return table[static_cast<std::size_t>(type)];
}

struct ChiSet {
  std::array<MaybeAngle, 4> chi{};

  int defined_count() const {
    return static_cast<int>(std::count_if(chi.begin(), chi.end(), [](const MaybeAngle& a) { return a.has_value(); }));
  }
};

// Missing atoms or degenerate placement leave the angle undefined.
inline ChiSet sidechain_torsions(const Residue& residue) {
  ChiSet out;
  const auto& entry = chi_table(residue.res_type);
  for (int c = 0; c < entry.count; ++c) {
    const auto& names = entry.chi[static_cast<std::size_t>(c)].atoms;
    std::array<const Atom*, 4> atoms{};
    bool complete = true;
    for (std::size_t k = 0; k < 4; ++k) {
      atoms[k] = residue.find(names[k]);
      complete = complete && atoms[k] != nullptr;
    }
    if (!complete) continue;
    try {
      out.chi[static_cast<std::size_t>(c)] =
          dihedral(atoms[0]->position, atoms[1]->position, atoms[2]->position, atoms[3]->position);
    } catch (const Error&) {
    }
  }
  return out;
}

struct GraphTopology {
  std::size_t num_nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (source, target)

  std::vector<std::size_t> in_degrees() const {
    std::vector<std::size_t> deg(num_nodes, 0);
    for (const auto& e : edges) ++deg[e.second];
    return deg;
  }
};

// For every node i, edges (j -> i) from its k nearest other nodes, ordered by
// (squared distance, index). k is clamped to n - 1.
inline GraphTopology knn_graph(std::span<const Vec3> points, std::size_t k) {
  const std::size_t n = points.size();
  if (n < 2) fail(ErrorKind::TooFewNodes, "k-NN graph needs at least two nodes");
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be positive");
  const std::size_t kk = std::min(k, n - 1);

  GraphTopology g;
  g.num_nodes = n;
  g.edges.reserve(n * kk);
  std::vector<std::pair<double, std::size_t>> candidates;
  candidates.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) candidates.emplace_back((points[j] - points[i]).squaredNorm(), j);
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(kk), candidates.end());
    for (std::size_t r = 0; r < kk; ++r) g.edges.emplace_back(candidates[r].second, i);
  }
  return g;
}

// Edge list text format: one "src<TAB>dst" line per edge.
inline std::string write_edge_list(const GraphTopology& g) {
  std::string out;
  for (const auto& [src, dst] : g.edges) {
    out += std::to_string(src);
    out += '\t';
    out += std::to_string(dst);
    out += '\n';
  }
  return out;
}

inline GraphTopology parse_edge_list(std::string_view text, std::size_t num_nodes) {
  GraphTopology g;
  g.num_nodes = num_nodes;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t src = 0, dst = 0;
    char tab = 0;
    if (!(fields >> src) || !fields.get(tab) || tab != '\t' || !(fields >> dst) || src >= num_nodes ||
        dst >= num_nodes || src == dst) {
      fail(ErrorKind::MalformedRecord, "edge list line " + std::to_string(line_no), line_no);
    }
    g.edges.emplace_back(src, dst);
  }
  return g;
}

struct Superposition {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();
  double rmsd = 0.0;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

namespace geometry_detail {

inline bool collinear(std::span<const Vec3> pts, const Vec3& centroid) {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();  // ascending
  return ev(1) <= 1e-12 * std::max(ev(2), 1e-300);
}

}  // namespace geometry_detail

// Proper rigid motion minimising RMSD of (R*a + t) against b.
inline Superposition kabsch(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.size() != b.size() || a.size() < 3) {
    fail(ErrorKind::DegenerateConfiguration, "kabsch needs two equal-length sets of >= 3 points");
  }
  const double n = static_cast<double>(a.size());
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
  }
  ca /= n;
  cb /= n;
  if (geometry_detail::collinear(a, ca) || geometry_detail::collinear(b, cb)) {
    fail(ErrorKind::DegenerateConfiguration, "kabsch on collinear points");
  }

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) h += (a[i] - ca) * (b[i] - cb).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;

  Superposition s;
  s.rotation = v * d * u.transpose();
  s.translation = cb - s.rotation * ca;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (s.apply(a[i]) - b[i]).squaredNorm();
  s.rmsd = std::sqrt(sum / n);
  return s;
}

}  // namespace protkit
