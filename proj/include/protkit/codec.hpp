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

// Backbone internal-coordinate codec. Layout of an encoded chain
// (little-endian throughout, see docs/codec-format.md):
//
//   offset  size  field
//   0       4     magic "FKC1"
//   4       1     version: bits 0-6 = 1, bit 7 = terminal torsions stored as 0
//   5       36    anchor N, CA, C of residue 0 as 9 x f32
//   41      13*n  per residue: u8 token (bit 7 set on the final record),
//                 u16 phi, psi, omega, theta_n, theta_ca, theta_c
//
// The residue count is implied by the body length.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "protkit/error.hpp"
#include "protkit/geometry.hpp"
#include "protkit/structure.hpp"

namespace protkit {

struct CanonicalGeometry {
  double n_ca = 1.458;
  double ca_c = 1.525;
  double c_n = 1.329;
  double c_o = 1.231;
  double ca_c_o = 2.106;
  // Stand-ins for the bond angles that do not exist past the last residue.
  double terminal_ca_c_n = 2.028;
  double terminal_c_n_ca = 2.124;

  void validate() const {
    if (!(n_ca > 0 && ca_c > 0 && c_n > 0 && c_o > 0)) {
      fail(ErrorKind::InvalidArgument, "bond lengths must be positive");
    }
  }
};

struct ResidueInternal {
  ResidueType res_type = ResidueType::UNKNOWN;
  double phi = 0.0;       // C(i-1)-N-CA-C
  double psi = 0.0;       // N-CA-C-N(i+1)
  double omega = 0.0;     // CA-C-N(i+1)-CA(i+1)
  double theta_n = 0.0;   // N-CA-C
  double theta_ca = 0.0;  // CA-C-N(i+1)
  double theta_c = 0.0;   // C-N(i+1)-CA(i+1)
};

struct InternalCoords {
  std::vector<ResidueInternal> residues;
  std::array<Vec3, 3> anchor{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};  // N, CA, C of residue 0
  // phi of the first residue, psi and omega of the last are undefined and stored as 0.
  bool terminal_torsions_zeroed = true;
};

// Natural extension reference frame: place d so that |d - c| = length,
// angle(b, c, d) = bond_angle and dihedral(a, b, c, d) = torsion.
inline Vec3 nerf_place(const Vec3& a, const Vec3& b, const Vec3& c, double length, double bond_angle,
                       double torsion) {
  if (!(length > 0.0) || !(bond_angle > 0.0 && bond_angle < kPi)) {
    fail(ErrorKind::InvalidArgument, "nerf_place needs length > 0 and bond angle in (0, pi)");
  }
  const Vec3 bc = c - b;
  const double bc_norm = bc.norm();
  if (bc_norm < kGeometryEps) fail(ErrorKind::DegenerateFrame, "coincident frame points");
  const Vec3 bc_hat = bc / bc_norm;
  const Vec3 n = (b - a).cross(bc_hat);
  const double n_norm = n.norm();
  if (n_norm < kGeometryEps) fail(ErrorKind::DegenerateFrame, "collinear frame points");
  const Vec3 n_hat = n / n_norm;
  const Vec3 m = n_hat.cross(bc_hat);

  const double r_sin = length * std::sin(bond_angle);
  return c - length * std::cos(bond_angle) * bc_hat + r_sin * std::cos(torsion) * m +
         r_sin * std::sin(torsion) * n_hat;
}

inline InternalCoords to_internal(const Chain& chain, const CanonicalGeometry& geom = {}) {
  using geometry_detail::require_atom;
  const std::size_t n = chain.residues.size();
  if (n < 3) fail(ErrorKind::ChainTooShort, "codec needs at least 3 residues, got " + std::to_string(n));

  const DihedralSet torsions = backbone_dihedrals(chain);
  InternalCoords ic;
  ic.residues.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Residue& res = chain.residues[i];
    ResidueInternal& r = ic.residues[i];
    r.res_type = res.res_type;
    r.phi = torsions.phi[i].value_or(0.0);
    r.psi = torsions.psi[i].value_or(0.0);
    r.omega = torsions.omega[i].value_or(0.0);
    const Vec3& N = require_atom(res, "N");
    const Vec3& CA = require_atom(res, "CA");
    const Vec3& C = require_atom(res, "C");
    r.theta_n = bond_angle(N, CA, C);
    if (i + 1 < n) {
      const Vec3& N1 = require_atom(chain.residues[i + 1], "N");
      const Vec3& CA1 = require_atom(chain.residues[i + 1], "CA");
      r.theta_ca = bond_angle(CA, C, N1);
      r.theta_c = bond_angle(C, N1, CA1);
    } else {
      r.theta_ca = geom.terminal_ca_c_n;
      r.theta_c = geom.terminal_c_n_ca;
    }
  }
  const Residue& first = chain.residues.front();
  ic.anchor = {require_atom(first, "N"), require_atom(first, "CA"), require_atom(first, "C")};
  return ic;
}

// Sequential placement from the anchor. O atoms follow the planar-amide rule:
// torsion N-CA-C-O = psi + pi, and pi for the final residue.
inline Chain from_internal(const InternalCoords& ic, const CanonicalGeometry& geom = {}) {
  geom.validate();
  const std::size_t n = ic.residues.size();
  if (n == 0) fail(ErrorKind::ChainTooShort, "no residues to place");

  std::vector<Vec3> N(n), CA(n), C(n);
  N[0] = ic.anchor[0];
  CA[0] = ic.anchor[1];
  C[0] = ic.anchor[2];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const ResidueInternal& r = ic.residues[i];
    const ResidueInternal& next = ic.residues[i + 1];
    N[i + 1] = nerf_place(N[i], CA[i], C[i], geom.c_n, r.theta_ca, r.psi);
    CA[i + 1] = nerf_place(CA[i], C[i], N[i + 1], geom.n_ca, r.theta_c, r.omega);
    C[i + 1] = nerf_place(C[i], N[i + 1], CA[i + 1], geom.ca_c, next.theta_n, next.phi);
  }

  Chain chain;
  chain.id = 'A';
  chain.residues.reserve(n);
  int serial = 1;
  auto make_atom = [&serial](std::string name, std::string element, const Vec3& p) {
    Atom a;
    a.name = std::move(name);
    a.element = std::move(element);
    a.position = p;
    a.serial = serial++;
    return a;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double o_torsion = i + 1 < n ? wrap_angle(ic.residues[i].psi + kPi) : kPi;
    const Vec3 O = nerf_place(N[i], CA[i], C[i], geom.c_o, geom.ca_c_o, o_torsion);
    Residue res;
    res.res_type = ic.residues[i].res_type;
    res.res_name = std::string(residue_name(res.res_type));
    res.seq_index = static_cast<int>(i) + 1;
    res.atoms = {make_atom("N", "N", N[i]), make_atom("CA", "C", CA[i]), make_atom("C", "C", C[i]),
                 make_atom("O", "O", O)};
    chain.residues.push_back(std::move(res));
  }
  return chain;
}

// ---------------------------------------------------------------------------
// Quantisation. Torsions in [-pi, pi) map to q = round((a + pi) / 2pi * 65535),
// bond angles in [0, pi] to q = round(a / pi * 65535). The two end codes own
// half-width cells and dequantise to the middle of those cells.

inline constexpr double kTorsionStep = 2.0 * kPi / 65535.0;
inline constexpr double kBondAngleStep = kPi / 65535.0;

inline std::uint16_t quantise_torsion(double angle) {
  const double x = (wrap_angle(angle) + kPi) / (2.0 * kPi) * 65535.0;
  return static_cast<std::uint16_t>(std::clamp(std::llround(x), 0LL, 65535LL));
}

inline double dequantise_torsion(std::uint16_t q) {
  if (q == 0) return -kPi + kTorsionStep / 4.0;
  if (q == 65535) return kPi - kTorsionStep / 4.0;
  return -kPi + q * kTorsionStep;
}

inline std::uint16_t quantise_bond_angle(double angle) {
  const double x = angle / kPi * 65535.0;
  return static_cast<std::uint16_t>(std::clamp(std::llround(x), 0LL, 65535LL));
}

inline double dequantise_bond_angle(std::uint16_t q) {
  if (q == 0) return kBondAngleStep / 4.0;
  if (q == 65535) return kPi - kBondAngleStep / 4.0;
  return q * kBondAngleStep;
}

struct EncodedProtein {
  static constexpr std::array<std::uint8_t, 4> kMagic = {'F', 'K', 'C', '1'};
  static constexpr std::uint8_t kVersion = 1;
  static constexpr std::uint8_t kTerminalZeroFlag = 0x80;
  static constexpr std::uint8_t kLastRecordFlag = 0x80;
  static constexpr std::size_t kHeaderBytes = 41;
  static constexpr std::size_t kResidueBytes = 13;

  std::vector<std::uint8_t> bytes;

  std::size_t size() const { return bytes.size(); }
  static constexpr std::size_t size_for(std::size_t residues) { return kHeaderBytes + kResidueBytes * residues; }
};

namespace codec_detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_f32(std::vector<std::uint8_t>& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((bits >> s) & 0xFF));
}

inline std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

inline float get_f32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t bits = 0;
  for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(in[at + static_cast<std::size_t>(k)]) << (8 * k);
  return std::bit_cast<float>(bits);
}

inline Vec3 round_to_f32(const Vec3& p) {
  return Vec3(static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z()));
}

}  // namespace codec_detail

inline EncodedProtein encode(const Chain& chain, const CanonicalGeometry& geom = {}) {
  using namespace codec_detail;
  InternalCoords ic = to_internal(chain, geom);
  for (auto& p : ic.anchor) p = round_to_f32(p);
  // The decoder only ever sees the rounded anchor.
  ic.residues[0].theta_n = bond_angle(ic.anchor[0], ic.anchor[1], ic.anchor[2]);

  EncodedProtein e;
  e.bytes.reserve(EncodedProtein::size_for(ic.residues.size()));
  for (std::uint8_t b : EncodedProtein::kMagic) e.bytes.push_back(b);
  e.bytes.push_back(EncodedProtein::kVersion | EncodedProtein::kTerminalZeroFlag);
  for (const auto& p : ic.anchor) {
    for (int k = 0; k < 3; ++k) put_f32(e.bytes, static_cast<float>(p[k]));
  }
  for (std::size_t i = 0; i < ic.residues.size(); ++i) {
    const auto& r = ic.residues[i];
    auto token = static_cast<std::uint8_t>(token_of(r.res_type));
    if (i + 1 == ic.residues.size()) token |= EncodedProtein::kLastRecordFlag;
    e.bytes.push_back(token);
    put_u16(e.bytes, quantise_torsion(r.phi));
    put_u16(e.bytes, quantise_torsion(r.psi));
    put_u16(e.bytes, quantise_torsion(r.omega));
    put_u16(e.bytes, quantise_bond_angle(r.theta_n));
    put_u16(e.bytes, quantise_bond_angle(r.theta_ca));
    put_u16(e.bytes, quantise_bond_angle(r.theta_c));
  }
  return e;
}

inline InternalCoords decode_internal(std::span<const std::uint8_t> in) {
  using namespace codec_detail;
  if (in.size() < 4) fail(ErrorKind::TruncatedPayload, "shorter than the magic");
  if (!std::equal(EncodedProtein::kMagic.begin(), EncodedProtein::kMagic.end(), in.begin())) {
    fail(ErrorKind::BadMagic, "expected FKC1");
  }
  if (in.size() < 5) fail(ErrorKind::TruncatedPayload, "missing version byte");
  if ((in[4] & 0x7F) != EncodedProtein::kVersion) {
    fail(ErrorKind::VersionMismatch, "format version " + std::to_string(in[4] & 0x7F));
  }
  if (in.size() < EncodedProtein::kHeaderBytes) fail(ErrorKind::TruncatedPayload, "header cut short");
  const std::size_t body = in.size() - EncodedProtein::kHeaderBytes;
  if (body == 0 || body % EncodedProtein::kResidueBytes != 0) {
    fail(ErrorKind::TruncatedPayload, "body is not a whole number of 13-byte records");
  }
  const std::size_t n = body / EncodedProtein::kResidueBytes;

  InternalCoords ic;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t at = 5 + 12 * k;
    ic.anchor[k] = Vec3(get_f32(in, at), get_f32(in, at + 4), get_f32(in, at + 8));
    if (!ic.anchor[k].allFinite()) fail(ErrorKind::MalformedRecord, "non-finite anchor coordinate");
  }
  ic.residues.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = EncodedProtein::kHeaderBytes + i * EncodedProtein::kResidueBytes;
    const std::uint8_t raw = in[at];
    const bool last_flag = (raw & EncodedProtein::kLastRecordFlag) != 0;
    if (last_flag != (i + 1 == n)) {
      if (i + 1 == n) fail(ErrorKind::TruncatedPayload, "final record marker missing");
      fail(ErrorKind::MalformedRecord, "final record marker on record " + std::to_string(i));
    }
    const int token = raw & 0x7F;
    if (token > kUnknownToken) fail(ErrorKind::MalformedRecord, "residue token " + std::to_string(token));
    auto& r = ic.residues[i];
    r.res_type = static_cast<ResidueType>(token);
    r.phi = dequantise_torsion(get_u16(in, at + 1));
    r.psi = dequantise_torsion(get_u16(in, at + 3));
    r.omega = dequantise_torsion(get_u16(in, at + 5));
    r.theta_n = dequantise_bond_angle(get_u16(in, at + 7));
    r.theta_ca = dequantise_bond_angle(get_u16(in, at + 9));
    r.theta_c = dequantise_bond_angle(get_u16(in, at + 11));
  }
  if (n < 3) fail(ErrorKind::ChainTooShort, "encoded chain has fewer than 3 residues");
  return ic;
}

inline Chain decode(std::span<const std::uint8_t> in, const CanonicalGeometry& geom = {}) {
  return from_internal(decode_internal(in), geom);
}

inline Chain decode(const EncodedProtein& e, const CanonicalGeometry& geom = {}) {
  return decode(std::span<const std::uint8_t>(e.bytes), geom);
}

// Backbone (N, CA, C, O) RMSD after optimal superposition; residues are
// matched by position.
inline double backbone_rmsd(const Chain& a, const Chain& b) {
  std::vector<Vec3> pa, pb;
  const std::size_t n = std::min(a.residues.size(), b.residues.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (const char* name : {"N", "CA", "C", "O"}) {
      const Atom* x = a.residues[i].find(name);
      const Atom* y = b.residues[i].find(name);
      if (x && y) {
        pa.push_back(x->position);
        pb.push_back(y->position);
      }
    }
  }
  return kabsch(pa, pb).rmsd;
}

}  // namespace protkit
