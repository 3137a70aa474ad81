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
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "protkit/error.hpp"
#include "protkit/residue.hpp"

namespace protkit {

using Vec3 = Eigen::Vector3d;

struct Atom {
  std::string name;     // trimmed, e.g. "CA"
  std::string element;  // e.g. "C", "ZN"
  Vec3 position = Vec3::Zero();
  double occupancy = 1.0;
  double b_factor = 0.0;  // pLDDT for predicted models
  bool is_hetero = false;
  int serial = 1;
};

struct Residue {
  ResidueType res_type = ResidueType::UNKNOWN;
  std::string res_name;  // 3-letter code as read; kept so non-canonical names survive writing
  int seq_index = 0;
  char insertion_code = ' ';
  std::vector<Atom> atoms;

  const Atom* find(std::string_view atom_name) const {
    for (const auto& a : atoms) {
      if (a.name == atom_name) return &a;
    }
    return nullptr;
  }
  bool has(std::string_view atom_name) const { return find(atom_name) != nullptr; }

  bool backbone_complete() const {
    return is_canonical(res_type) && has("N") && has("CA") && has("C") && has("O");
  }
};

struct Chain {
  char id = 'A';
  std::vector<Residue> residues;
};

// Ligands and ions; waters are never stored here.
struct HeteroAtom {
  Atom atom;
  std::string res_name;
  char chain_id = ' ';
  int seq_index = 0;
  char insertion_code = ' ';
};

enum class Method { XRAY, NMR, EM, PREDICTED, OTHER };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::XRAY: return "XRAY";
    case Method::NMR: return "NMR";
    case Method::EM: return "EM";
    case Method::PREDICTED: return "PREDICTED";
    case Method::OTHER: return "OTHER";
  }
  return "OTHER";
}

inline std::optional<Method> method_from_string(std::string_view s) {
  for (Method m : {Method::XRAY, Method::NMR, Method::EM, Method::PREDICTED, Method::OTHER}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

struct Structure {
  std::string id;
  std::vector<Chain> chains;
  std::optional<double> resolution;          // Angstrom
  std::optional<std::string> deposition_date;  // ISO YYYY-MM-DD
  std::optional<Method> method;
  std::vector<HeteroAtom> hetero_atoms;

  std::size_t residue_count() const {
    std::size_t n = 0;
    for (const auto& c : chains) n += c.residues.size();
    return n;
  }

  const Chain* find_chain(char chain_id) const {
    for (const auto& c : chains) {
      if (c.id == chain_id) return &c;
    }
    return nullptr;
  }
};

enum class Granularity { CA_ONLY, BACKBONE, ALL_ATOM };

struct GranularityResult {
  Structure structure;
  std::size_t dropped = 0;  // residues removed for missing required atoms
};

inline GranularityResult select_granularity(const Structure& s, Granularity level) {
  if (level == Granularity::ALL_ATOM) return {s, 0};

  static constexpr std::string_view kBackbone[] = {"N", "CA", "C", "O"};
  GranularityResult out;
  out.structure = s;
  out.structure.chains.clear();

  for (const auto& chain : s.chains) {
    Chain kept{chain.id, {}};
    for (const auto& res : chain.residues) {
      Residue r = res;
      r.atoms.clear();
      if (level == Granularity::CA_ONLY) {
        if (const Atom* ca = res.find("CA")) r.atoms.push_back(*ca);
      } else if (res.backbone_complete()) {
        for (auto name : kBackbone) r.atoms.push_back(*res.find(name));
      }
      if (r.atoms.empty()) {
        ++out.dropped;
      } else {
        kept.residues.push_back(std::move(r));
      }
    }
    if (!kept.residues.empty()) out.structure.chains.push_back(std::move(kept));
  }
  if (out.structure.chains.empty()) {
    fail(ErrorKind::NoCompleteResidues, "no residue has the atoms required by the requested granularity");
  }
  return out;
}

}  // namespace protkit
