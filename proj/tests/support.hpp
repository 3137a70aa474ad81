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

// Synthetic structures and rigid motions shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "protkit/protkit.hpp"

namespace protkit::testing {

inline constexpr double kIdealThetaN = 1.939;   // N-CA-C
inline constexpr double kIdealThetaCa = 2.028;  // CA-C-N
inline constexpr double kIdealThetaC = 2.124;   // C-N-CA

inline Vec3 random_vec(CounterRng& rng, double scale = 1.0) {
  return Vec3(rng.uniform_symmetric(), rng.uniform_symmetric(), rng.uniform_symmetric()) * scale;
}

inline Vec3 random_unit(CounterRng& rng) {
  Vec3 v(rng.normal(), rng.normal(), rng.normal());
  return v.normalized();
}

inline Eigen::Matrix3d random_rotation(CounterRng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return q.normalized().toRotationMatrix();
}

// det -1
inline Eigen::Matrix3d random_reflection(CounterRng& rng) {
  const Vec3 n = random_unit(rng);
  return random_rotation(rng) * (Eigen::Matrix3d::Identity() - 2.0 * n * n.transpose());
}

inline Eigen::MatrixX3d transform(const Eigen::MatrixX3d& X, const Eigen::Matrix3d& R, const Vec3& t) {
  Eigen::MatrixX3d out = (X * R.transpose()).rowwise() + t.transpose();
  return out;
}

inline Structure transform(Structure s, const Eigen::Matrix3d& R, const Vec3& t) {
  for (auto& c : s.chains) {
    for (auto& r : c.residues) {
      for (auto& a : r.atoms) a.position = R * a.position + t;
    }
  }
  for (auto& h : s.hetero_atoms) h.atom.position = R * h.atom.position + t;
  return s;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Relative drift |a - b|_inf / max(1, |b|_inf).
inline double rel_drift(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return max_abs(a - b) / std::max(1.0, max_abs(b));
}

// Backbone with random phi/psi, near-trans omega and jittered ideal bond
// angles, anchored at a random position.
inline InternalCoords random_internal(std::size_t n, CounterRng& rng) {
  InternalCoords ic;
  ic.residues.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = ic.residues[i];
    r.res_type = static_cast<ResidueType>(rng.uniform_index(kNumCanonical));
    r.phi = i > 0 ? kPi * rng.uniform_symmetric() : 0.0;
    r.psi = i + 1 < n ? kPi * rng.uniform_symmetric() : 0.0;
    r.omega = i + 1 < n ? wrap_angle(kPi + 0.1 * rng.normal()) : 0.0;
    r.theta_n = kIdealThetaN + 0.03 * rng.normal();
    r.theta_ca = i + 1 < n ? kIdealThetaCa + 0.03 * rng.normal() : CanonicalGeometry{}.terminal_ca_c_n;
    r.theta_c = i + 1 < n ? kIdealThetaC + 0.03 * rng.normal() : CanonicalGeometry{}.terminal_c_n_ca;
  }
  const CanonicalGeometry geom;
  const Vec3 n0 = random_vec(rng, 20.0);
  const Vec3 u = random_unit(rng);
  const Vec3 ca0 = n0 + geom.n_ca * u;
  Vec3 perp = u.cross(random_unit(rng)).normalized();
  // C such that angle(N, CA, C) = theta_n
  const double t = ic.residues[0].theta_n;
  const Vec3 c0 = ca0 + geom.ca_c * (-std::cos(t) * u + std::sin(t) * perp);
  ic.anchor = {n0, ca0, c0};
  return ic;
}

inline Chain random_chain(std::size_t n, CounterRng& rng) { return from_internal(random_internal(n, rng)); }

inline Chain helix_chain(std::size_t n, const Vec3& origin = Vec3::Zero()) {
  InternalCoords ic;
  ic.residues.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = ic.residues[i];
    r.res_type = static_cast<ResidueType>(i % kNumCanonical);
    r.phi = i > 0 ? -60.0 * kPi / 180.0 : 0.0;
    r.psi = i + 1 < n ? -47.0 * kPi / 180.0 : 0.0;
    r.omega = i + 1 < n ? kPi - 1e-9 : 0.0;
    r.theta_n = kIdealThetaN;
    r.theta_ca = kIdealThetaCa;
    r.theta_c = kIdealThetaC;
  }
  const CanonicalGeometry geom;
  ic.anchor = {origin, origin + Vec3(geom.n_ca, 0, 0),
               origin + Vec3(geom.n_ca, 0, 0) +
                   geom.ca_c * Vec3(-std::cos(kIdealThetaN), std::sin(kIdealThetaN), 0)};
  return from_internal(ic);
}

// Ideal CB for every non-glycine residue.
inline void add_cb(Chain& chain) {
  int serial = 0;
  for (auto& r : chain.residues) {
    for (auto& a : r.atoms) serial = std::max(serial, a.serial);
  }
  for (auto& r : chain.residues) {
    if (r.res_type == ResidueType::GLY || !r.has("N") || !r.has("CA") || !r.has("C")) continue;
    Atom cb;
    cb.name = "CB";
    cb.element = "C";
    cb.position = nerf_place(r.find("C")->position, r.find("N")->position, r.find("CA")->position, 1.53, 1.91, -2.14);
    cb.serial = ++serial;
    r.atoms.push_back(cb);
  }
}

inline void set_bfactors(Chain& chain, CounterRng& rng) {
  for (auto& r : chain.residues) {
    const double b = std::round((50.0 + 49.99 * rng.uniform01()) * 100.0) / 100.0;
    for (auto& a : r.atoms) a.b_factor = b;
  }
}

inline HeteroAtom make_hetero(const std::string& code, const Vec3& p, char chain, int seq) {
  HeteroAtom h;
  h.atom.name = code;
  h.atom.element = code;
  h.atom.position = p;
  h.atom.is_hetero = true;
  h.res_name = code;
  h.chain_id = chain;
  h.seq_index = seq;
  return h;
}

// Chains of random backbones started near one another, plus metal ions
// placed 1.5-5 A from random atoms so both sides of the cutoff occur.
inline Structure random_complex(CounterRng& rng, std::size_t chains, std::size_t residues, std::size_t metals) {
  Structure s;
  s.id = "SYN1";
  const char ids[] = "ABCDEFGH";
  for (std::size_t c = 0; c < chains; ++c) {
    InternalCoords ic = random_internal(residues, rng);
    const Vec3 shift = random_vec(rng, 4.0) - ic.anchor[0];
    for (auto& p : ic.anchor) p += shift;
    Chain chain = from_internal(ic);
    chain.id = ids[c % 8];
    add_cb(chain);
    s.chains.push_back(std::move(chain));
  }
  for (std::size_t m = 0; m < metals; ++m) {
    const Chain& chain = s.chains[rng.uniform_index(s.chains.size())];
    const Residue& r = chain.residues[rng.uniform_index(chain.residues.size())];
    const Atom& a = r.atoms[rng.uniform_index(r.atoms.size())];
    const Vec3 p = a.position + random_unit(rng) * (1.5 + 3.5 * rng.uniform01());
    s.hetero_atoms.push_back(make_hetero(m % 2 == 0 ? "ZN" : "MG", p, 'Z', static_cast<int>(m + 1)));
  }
  return s;
}

inline Structure single_chain_structure(Chain chain, const std::string& id = "TEST") {
  Structure s;
  s.id = id;
  s.chains.push_back(std::move(chain));
  return s;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("protkit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace protkit::testing
